#pragma once

#include <cstddef>
#include <vector>

#include "lseforge/encoder.hpp"
#include "lseforge/matrix.hpp"

namespace lseforge {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction. Parameters are stored in float; the moment
// buffers and all update arithmetic stay in double so the optimizer path is
// identical no matter how the gradients were produced.
class AdamState {
 public:
  AdamState(std::size_t catalog, std::size_t hidden, const AdamConfig& cfg);

  // Applies one update from the accumulated batch gradients.
  void step(ToyEncoderParams& params, const EncoderGrads& grads);

  std::size_t steps_taken() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  struct Moments {
    std::vector<double> m;
    std::vector<double> v;
    explicit Moments(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
  };

  void apply(float* param, const double* grad, Moments& mom, std::size_t n, double corr1,
             double corr2);

  AdamConfig cfg_;
  std::size_t catalog_;
  std::size_t hidden_;
  std::size_t t_ = 0;
  Moments emb_;
  Moments w_;
  Moments b_;
  Moments c_;
};

}  // namespace lseforge
