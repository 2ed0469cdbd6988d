#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lseforge/accountant.hpp"
#include "lseforge/matrix.hpp"
#include "lseforge/neg_index.hpp"

namespace lseforge {

// Forward result shared by every cross-entropy backend. loss is the mean
// negative log-likelihood over rows: (1/N) Σ_i (lse[i] − pos_logits[i]).
struct LossOutput {
  double loss = 0.0;
  std::vector<double> pos_logits;  // logit of each row's target item
  std::vector<double> lse;         // per-row log-sum-exp over the scored set
};

// Loss gradients with respect to the two inputs of the loss layer. Sampled
// backends return d_classifier full-width (D×V) with zeros in untouched
// columns so results compare shape-for-shape against the full-catalog ops.
struct GradPair {
  DenseMatrixD d_embeddings;  // N×D
  DenseMatrixD d_classifier;  // D×V
};

// Reference implementations. These materialize the complete logit matrix
// (full catalog or candidate set) and serve as ground truth for the fused
// kernels; nothing here is tuned for memory.

LossOutput ce_full_forward(const DenseMatrix& E, const DenseMatrix& C,
                           std::span<const std::int64_t> x, MemAccountant* acct = nullptr);

GradPair ce_full_backward(const DenseMatrix& E, const DenseMatrix& C,
                          std::span<const std::int64_t> x, double upstream,
                          MemAccountant* acct = nullptr);

LossOutput ce_sampled_forward(const DenseMatrix& E, const DenseMatrix& C,
                              const NegIndexMatrix& inds, MemAccountant* acct = nullptr);

GradPair ce_sampled_backward(const DenseMatrix& E, const DenseMatrix& C,
                             const NegIndexMatrix& inds, double upstream,
                             MemAccountant* acct = nullptr);

struct BceResult {
  double loss = 0.0;
  GradPair grads;
};

// One positive against one sampled negative per row, sigmoid formulation:
// loss = −(1/N) Σ_i [log σ(pos_i) + log(1 − σ(neg_i))].
BceResult bce_forward_backward(const DenseMatrix& E, const DenseMatrix& C,
                               std::span<const std::int64_t> x,
                               std::span<const std::int64_t> neg, MemAccountant* acct = nullptr);

// Shared input validation for the loss layer (shapes, index ranges, N ≥ 1).
void validate_loss_inputs(const DenseMatrix& E, const DenseMatrix& C,
                          std::span<const std::int64_t> x);

}  // namespace lseforge
