#pragma once

#include <span>
#include <vector>

namespace lseforge {

// 1-based ranks; tied values share the average of the positions they occupy.
std::vector<double> average_ranks(std::span<const double> values);

// Spearman rank correlation: Pearson correlation of the average ranks.
// Returns NaN when either input is constant (the correlation is undefined).
double spearman(std::span<const double> xs, std::span<const double> ys);

// Upper-tail probability P(X >= stat) for a chi-square distribution with
// `dof` degrees of freedom, via the regularized incomplete gamma function.
double chi_square_sf(double stat, int dof);

// Pearson chi-square goodness-of-fit statistic for observed counts against
// expected counts (> 0 each); returns the p-value.
double chi_square_gof_pvalue(std::span<const double> observed, std::span<const double> expected);

}  // namespace lseforge
