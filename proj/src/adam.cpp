#include "lseforge/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace lseforge {

AdamState::AdamState(std::size_t catalog, std::size_t hidden, const AdamConfig& cfg)
    : cfg_(cfg), catalog_(catalog), hidden_(hidden), emb_(catalog * hidden),
      w_(hidden * hidden), b_(hidden), c_(hidden * catalog) {
  if (catalog == 0 || hidden == 0) {
    throw std::invalid_argument("adam: catalog and hidden must be >= 1");
  }
  if (cfg.beta1 < 0.0 || cfg.beta1 >= 1.0 || cfg.beta2 < 0.0 || cfg.beta2 >= 1.0) {
    throw std::invalid_argument("adam: betas must lie in [0, 1)");
  }
  if (cfg.eps <= 0.0) {
    throw std::invalid_argument("adam: eps must be positive");
  }
}

void AdamState::apply(float* param, const double* grad, Moments& mom, std::size_t n, double corr1,
                      double corr2) {
  const double b1 = cfg_.beta1;
  const double b2 = cfg_.beta2;
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grad[i];
    mom.m[i] = b1 * mom.m[i] + (1.0 - b1) * g;
    mom.v[i] = b2 * mom.v[i] + (1.0 - b2) * g * g;
    const double mhat = mom.m[i] / corr1;
    const double vhat = mom.v[i] / corr2;
    const double p = static_cast<double>(param[i]) - cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    param[i] = static_cast<float>(p);
  }
}

void AdamState::step(ToyEncoderParams& params, const EncoderGrads& grads) {
  if (params.catalog() != catalog_ || params.hidden() != hidden_) {
    throw std::invalid_argument("adam: parameter shapes do not match the optimizer state");
  }
  if (grads.d_emb.rows() != catalog_ || grads.d_emb.cols() != hidden_ ||
      grads.d_classifier.rows() != hidden_ || grads.d_classifier.cols() != catalog_ ||
      grads.d_w.rows() != hidden_ || grads.d_b.size() != hidden_) {
    throw std::invalid_argument("adam: gradient shapes do not match the optimizer state");
  }
  ++t_;
  const double corr1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double corr2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  apply(params.emb.data().data(), grads.d_emb.data().data(), emb_, catalog_ * hidden_, corr1,
        corr2);
  apply(params.w.data().data(), grads.d_w.data().data(), w_, hidden_ * hidden_, corr1, corr2);
  apply(params.b.data(), grads.d_b.data(), b_, hidden_, corr1, corr2);
  apply(params.c.data().data(), grads.d_classifier.data().data(), c_, hidden_ * catalog_, corr1,
        corr2);
}

}  // namespace lseforge
