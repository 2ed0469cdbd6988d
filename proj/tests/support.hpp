#pragma once

// Shared helpers for the test suites: random problem instances and a
// finite-difference checker that respects float parameter storage.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "lseforge/matrix.hpp"
#include "lseforge/neg_index.hpp"
#include "lseforge/rng.hpp"

namespace testsupport {

struct Instance {
  lseforge::DenseMatrix E;              // n × d
  lseforge::DenseMatrix C;              // d × v
  std::vector<std::int64_t> targets;    // n
};

inline float symmetric_uniform(lseforge::SplitMix64& rng, double half_width) {
  return static_cast<float>((2.0 * rng.uniform() - 1.0) * half_width);
}

inline Instance make_instance(lseforge::SplitMix64& rng, std::size_t n, std::size_t d,
                              std::size_t v, double half_width = 1.0) {
  Instance inst;
  inst.E = lseforge::DenseMatrix(n, d);
  inst.C = lseforge::DenseMatrix(d, v);
  for (auto& x : inst.E.data()) x = symmetric_uniform(rng, half_width);
  for (auto& x : inst.C.data()) x = symmetric_uniform(rng, half_width);
  inst.targets.resize(n);
  for (auto& t : inst.targets) t = static_cast<std::int64_t>(rng.bounded(v));
  return inst;
}

// Candidate sets with slot 0 = positive and negatives drawn uniformly over
// the catalog excluding the positive (repeats across slots allowed).
inline lseforge::NegIndexMatrix make_candidates(lseforge::SplitMix64& rng,
                                                const std::vector<std::int64_t>& targets,
                                                std::size_t ns, std::size_t v) {
  lseforge::NegIndexMatrix inds(targets.size(), 1 + ns);
  for (std::size_t r = 0; r < targets.size(); ++r) {
    inds(r, 0) = targets[r];
    for (std::size_t s = 1; s <= ns; ++s) {
      std::int64_t draw;
      do {
        draw = static_cast<std::int64_t>(rng.bounded(v));
      } while (draw == targets[r]);
      inds(r, s) = draw;
    }
  }
  return inds;
}

// Central finite difference through float-typed parameter storage: the
// analytic gradient is compared against (f(p+h) − f(p−h)) / realized_step,
// where the step is what float rounding actually applied.
inline double fd_gradient(float& param, double h, const std::function<double()>& loss) {
  const float saved = param;
  const float hi = static_cast<float>(static_cast<double>(saved) + h);
  const float lo = static_cast<float>(static_cast<double>(saved) - h);
  param = hi;
  const double f_hi = loss();
  param = lo;
  const double f_lo = loss();
  param = saved;
  const double realized = static_cast<double>(hi) - static_cast<double>(lo);
  return (f_hi - f_lo) / realized;
}

inline double rel_err(double got, double want) {
  const double denom = std::max(1.0, std::fabs(want));
  return std::fabs(got - want) / denom;
}

}  // namespace testsupport
