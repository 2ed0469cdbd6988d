#include "lseforge/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace lseforge {

namespace {

constexpr int kMaxIterations = 500;
constexpr double kEps = 1e-14;

// Lower regularized incomplete gamma P(a, x) by series expansion; converges
// quickly for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int i = 0; i < kMaxIterations; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized incomplete gamma Q(a, x) by Lentz's continued fraction;
// converges quickly for x >= a + 1.
double gamma_q_fraction(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIterations; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    // Positions i..j (0-based) share the average of ranks i+1..j+1.
    const double avg = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw std::invalid_argument("spearman: size mismatch (" + std::to_string(xs.size()) + " vs " +
                                std::to_string(ys.size()) + ")");
  }
  if (xs.size() < 2) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  const std::vector<double> rx = average_ranks(xs);
  const std::vector<double> ry = average_ranks(ys);
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mx;
    const double dy = ry[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return sxy / std::sqrt(sxx * syy);
}

double chi_square_sf(double stat, int dof) {
  if (dof < 1) {
    throw std::invalid_argument("chi_square_sf: dof must be >= 1, got " + std::to_string(dof));
  }
  if (!(stat >= 0.0)) {
    throw std::invalid_argument("chi_square_sf: statistic must be >= 0, got " +
                                std::to_string(stat));
  }
  if (stat == 0.0) return 1.0;
  const double a = 0.5 * dof;
  const double x = 0.5 * stat;
  if (x < a + 1.0) {
    return 1.0 - gamma_p_series(a, x);
  }
  return gamma_q_fraction(a, x);
}

double chi_square_gof_pvalue(std::span<const double> observed, std::span<const double> expected) {
  if (observed.size() != expected.size()) {
    throw std::invalid_argument("chi_square_gof_pvalue: size mismatch");
  }
  if (observed.size() < 2) {
    throw std::invalid_argument("chi_square_gof_pvalue: need at least 2 categories");
  }
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (!(expected[i] > 0.0)) {
      throw std::invalid_argument("chi_square_gof_pvalue: expected count " + std::to_string(i) +
                                  " must be positive");
    }
    const double diff = observed[i] - expected[i];
    stat += diff * diff / expected[i];
  }
  return chi_square_sf(stat, static_cast<int>(observed.size()) - 1);
}

}  // namespace lseforge
