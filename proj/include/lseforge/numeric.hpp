#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <stdexcept>

namespace lseforge {

// Streaming log-sum-exp accumulator: tracks the running maximum m and the
// rescaled sum d so that value() == log(sum_i exp(o_i)) over everything fed
// to update(), without ever exponentiating an un-shifted logit.
struct OnlineLse {
  double max_log = -std::numeric_limits<double>::infinity();
  double sum = 0.0;

  void update(double o) {
    if (o <= max_log) {
      sum += std::exp(o - max_log);
      return;
    }
    // New maximum: rescale the existing sum into the new frame.
    sum = sum * std::exp(max_log - o) + 1.0;
    max_log = o;
  }

  double value() const { return max_log + std::log(sum); }
};

// Functional form of one streaming update: state is (m, d) with m + log d
// equal to the log-sum-exp of everything consumed so far; (−inf, 0) is the
// empty state.
inline std::pair<double, double> online_lse_update(std::pair<double, double> state, double o) {
  OnlineLse acc{state.first, state.second};
  acc.update(o);
  return {acc.max_log, acc.sum};
}

// Exact two-pass log-sum-exp of one row. Throws on an empty row.
inline double logsumexp_row(std::span<const double> values) {
  if (values.empty()) {
    throw std::invalid_argument("logsumexp_row: empty input");
  }
  double m = -std::numeric_limits<double>::infinity();
  for (double v : values) m = std::max(m, v);
  double s = 0.0;
  for (double v : values) s += std::exp(v - m);
  return m + std::log(s);
}

}  // namespace lseforge
