#include "lseforge/losses.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "lseforge/numeric.hpp"

namespace lseforge {

namespace {

// log(1 + e^z) without overflow on either tail.
double softplus(double z) {
  if (z > 0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Candidate logit o[i][s] = E_i · C[:, inds(i,s)], accumulated in double.
DenseMatrixD candidate_logits(const DenseMatrix& E, const DenseMatrix& C,
                              const NegIndexMatrix& inds) {
  const std::size_t n = E.rows();
  const std::size_t d = E.cols();
  const std::size_t w = inds.width();
  DenseMatrixD o(n, w);
  for (std::size_t i = 0; i < n; ++i) {
    const float* erow = E.row_ptr(i);
    for (std::size_t s = 0; s < w; ++s) {
      const auto v = static_cast<std::size_t>(inds(i, s));
      double acc = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        acc += static_cast<double>(erow[k]) * static_cast<double>(C(k, v));
      }
      o(i, s) = acc;
    }
  }
  return o;
}

}  // namespace

void validate_loss_inputs(const DenseMatrix& E, const DenseMatrix& C,
                          std::span<const std::int64_t> x) {
  if (E.rows() == 0) {
    throw std::invalid_argument("loss: embedding matrix has zero rows; the mean loss is undefined");
  }
  if (E.cols() != C.rows()) {
    throw std::invalid_argument("loss: embedding width " + std::to_string(E.cols()) +
                                " does not match classifier height " + std::to_string(C.rows()));
  }
  if (x.size() != E.rows()) {
    throw std::invalid_argument("loss: " + std::to_string(x.size()) + " targets for " +
                                std::to_string(E.rows()) + " embedding rows");
  }
  const auto catalog = static_cast<std::int64_t>(C.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < 0 || x[i] >= catalog) {
      throw std::invalid_argument("loss: row " + std::to_string(i) + " targets item " +
                                  std::to_string(x[i]) + ", outside catalog of " +
                                  std::to_string(catalog));
    }
  }
}

LossOutput ce_full_forward(const DenseMatrix& E, const DenseMatrix& C,
                           std::span<const std::int64_t> x, MemAccountant* acct) {
  validate_loss_inputs(E, C, x);
  const std::size_t n = E.rows();
  const std::size_t v = C.cols();

  // The materialized logit matrix and the LSE vector are what this backend
  // keeps alive for its backward pass; the positive logits are a gather view
  // into the logit matrix and carry no extra charge.
  if (acct) {
    acct->record_ensure("retained/ce/logits", n * v);
    acct->record_ensure("retained/ce/lse", n);
  }

  const DenseMatrixD logits = matmul_block(E, C);
  LossOutput out;
  out.pos_logits.resize(n);
  out.lse.resize(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.lse[i] = logsumexp_row({logits.row_ptr(i), v});
    out.pos_logits[i] = logits(i, static_cast<std::size_t>(x[i]));
    total += out.lse[i] - out.pos_logits[i];
  }
  out.loss = total / static_cast<double>(n);
  return out;
}

GradPair ce_full_backward(const DenseMatrix& E, const DenseMatrix& C,
                          std::span<const std::int64_t> x, double upstream, MemAccountant* acct) {
  validate_loss_inputs(E, C, x);
  const std::size_t n = E.rows();
  const std::size_t d = E.cols();
  const std::size_t v = C.cols();

  // Backward consumes the activations the forward retained; charging through
  // record_ensure keeps the count correct whether or not the forward ran
  // under this accountant.
  if (acct) {
    acct->record_ensure("retained/ce/logits", n * v);
    acct->record_ensure("retained/ce/lse", n);
  }

  const DenseMatrixD logits = matmul_block(E, C);
  GradPair grads{DenseMatrixD(n, d), DenseMatrixD(d, v)};
  const double scale = upstream / static_cast<double>(n);
  std::vector<double> g(v);
  for (std::size_t i = 0; i < n; ++i) {
    const double lse = logsumexp_row({logits.row_ptr(i), v});
    for (std::size_t j = 0; j < v; ++j) {
      g[j] = std::exp(logits(i, j) - lse) * scale;
    }
    g[static_cast<std::size_t>(x[i])] -= scale;

    const float* erow = E.row_ptr(i);
    double* derow = grads.d_embeddings.row_ptr(i);
    for (std::size_t k = 0; k < d; ++k) {
      const float* crow = C.row_ptr(k);
      double* dcrow = grads.d_classifier.row_ptr(k);
      const double e = erow[k];
      double acc = 0.0;
      for (std::size_t j = 0; j < v; ++j) {
        acc += g[j] * static_cast<double>(crow[j]);
        dcrow[j] += e * g[j];
      }
      derow[k] = acc;
    }
  }
  return grads;
}

LossOutput ce_sampled_forward(const DenseMatrix& E, const DenseMatrix& C,
                              const NegIndexMatrix& inds, MemAccountant* acct) {
  if (inds.rows() != E.rows()) {
    throw std::invalid_argument("sampled loss: " + std::to_string(inds.rows()) +
                                " candidate rows for " + std::to_string(E.rows()) +
                                " embedding rows");
  }
  std::vector<std::int64_t> pos(inds.rows());
  for (std::size_t i = 0; i < inds.rows(); ++i) pos[i] = inds.positive(i);
  validate_loss_inputs(E, C, pos);
  inds.validate(C.cols());

  const std::size_t n = E.rows();
  const std::size_t w = inds.width();
  if (acct) {
    acct->record_ensure("retained/cem/logits", n * w);
    acct->record_ensure("retained/cem/lse", n);
    acct->record_ensure("retained/cem/inds", n * w, ScalarKind::kIndex);
  }

  const DenseMatrixD o = candidate_logits(E, C, inds);
  LossOutput out;
  out.pos_logits.resize(n);
  out.lse.resize(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.lse[i] = logsumexp_row({o.row_ptr(i), w});
    out.pos_logits[i] = o(i, 0);
    total += out.lse[i] - out.pos_logits[i];
  }
  out.loss = total / static_cast<double>(n);
  return out;
}

GradPair ce_sampled_backward(const DenseMatrix& E, const DenseMatrix& C,
                             const NegIndexMatrix& inds, double upstream, MemAccountant* acct) {
  if (inds.rows() != E.rows()) {
    throw std::invalid_argument("sampled loss: " + std::to_string(inds.rows()) +
                                " candidate rows for " + std::to_string(E.rows()) +
                                " embedding rows");
  }
  std::vector<std::int64_t> pos(inds.rows());
  for (std::size_t i = 0; i < inds.rows(); ++i) pos[i] = inds.positive(i);
  validate_loss_inputs(E, C, pos);
  inds.validate(C.cols());

  const std::size_t n = E.rows();
  const std::size_t d = E.cols();
  const std::size_t v = C.cols();
  const std::size_t w = inds.width();
  if (acct) {
    acct->record_ensure("retained/cem/logits", n * w);
    acct->record_ensure("retained/cem/lse", n);
    acct->record_ensure("retained/cem/inds", n * w, ScalarKind::kIndex);
  }

  const DenseMatrixD o = candidate_logits(E, C, inds);
  GradPair grads{DenseMatrixD(n, d), DenseMatrixD(d, v)};
  const double scale = upstream / static_cast<double>(n);
  std::vector<double> g(w);
  for (std::size_t i = 0; i < n; ++i) {
    const double lse = logsumexp_row({o.row_ptr(i), w});
    for (std::size_t s = 0; s < w; ++s) {
      g[s] = std::exp(o(i, s) - lse) * scale;
    }
    g[0] -= scale;  // slot 0 is the positive: softmax minus one-hot

    const float* erow = E.row_ptr(i);
    double* derow = grads.d_embeddings.row_ptr(i);
    // Ascending slot order; duplicate candidate columns accumulate additively.
    for (std::size_t s = 0; s < w; ++s) {
      const auto col = static_cast<std::size_t>(inds(i, s));
      for (std::size_t k = 0; k < d; ++k) {
        derow[k] += g[s] * static_cast<double>(C(k, col));
        grads.d_classifier(k, col) += g[s] * static_cast<double>(erow[k]);
      }
    }
  }
  return grads;
}

BceResult bce_forward_backward(const DenseMatrix& E, const DenseMatrix& C,
                               std::span<const std::int64_t> x,
                               std::span<const std::int64_t> neg, MemAccountant* acct) {
  validate_loss_inputs(E, C, x);
  if (neg.size() != x.size()) {
    throw std::invalid_argument("bce: " + std::to_string(neg.size()) + " negatives for " +
                                std::to_string(x.size()) + " positives");
  }
  const std::size_t n = E.rows();
  const std::size_t d = E.cols();
  const std::size_t v = C.cols();
  const auto catalog = static_cast<std::int64_t>(v);
  for (std::size_t i = 0; i < n; ++i) {
    if (neg[i] < 0 || neg[i] >= catalog) {
      throw std::invalid_argument("bce: row " + std::to_string(i) + " negative " +
                                  std::to_string(neg[i]) + " outside catalog of " +
                                  std::to_string(catalog));
    }
    if (neg[i] == x[i]) {
      throw std::invalid_argument("bce: row " + std::to_string(i) + " negative collides with its positive item " +
                                  std::to_string(x[i]));
    }
  }

  if (acct) {
    acct->record_ensure("retained/bce/pos_logits", n);
    acct->record_ensure("retained/bce/neg_logits", n);
    acct->record_ensure("retained/bce/neg_inds", n, ScalarKind::kIndex);
  }

  BceResult out{0.0, {DenseMatrixD(n, d), DenseMatrixD(d, v)}};
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const float* erow = E.row_ptr(i);
    const auto xp = static_cast<std::size_t>(x[i]);
    const auto xn = static_cast<std::size_t>(neg[i]);
    double po = 0.0;
    double no = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      po += static_cast<double>(erow[k]) * static_cast<double>(C(k, xp));
      no += static_cast<double>(erow[k]) * static_cast<double>(C(k, xn));
    }
    // −log σ(po) − log(1 − σ(no)) in overflow-safe form.
    total += softplus(-po) + softplus(no);

    const double gp = (sigmoid(po) - 1.0) / static_cast<double>(n);
    const double gn = sigmoid(no) / static_cast<double>(n);
    double* derow = out.grads.d_embeddings.row_ptr(i);
    for (std::size_t k = 0; k < d; ++k) {
      derow[k] = gp * static_cast<double>(C(k, xp)) + gn * static_cast<double>(C(k, xn));
      out.grads.d_classifier(k, xp) += gp * static_cast<double>(erow[k]);
      out.grads.d_classifier(k, xn) += gn * static_cast<double>(erow[k]);
    }
  }
  out.loss = total / static_cast<double>(n);
  return out;
}

}  // namespace lseforge
