#pragma once

#include <cstdint>
#include <span>

#include "lseforge/accountant.hpp"
#include "lseforge/losses.hpp"
#include "lseforge/matrix.hpp"

namespace lseforge {

// Smallest positive 16-bit float; softmax values at or below this level
// round to zero in half-precision storage, which is what gradient filtering
// exploits.
inline constexpr double kFp16MinPositive = 6e-8;

// Tiling and filtering knobs for the fused losses.
struct CceConfig {
  std::size_t row_block = 128;  // rows of E per tile
  std::size_t col_block = 256;  // catalog columns per tile
  double filter_eps = 0.0;      // 0 = exact backward; >0 skips softmax entries below it
  int workers = 0;              // 0 = LSEFORGE_THREADS env, else 1

  // Preset matching half-precision saturation: skip backward contributions
  // whose softmax value would round to zero in fp16 storage.
  static CceConfig Fp16SaturationPreset() {
    CceConfig cfg;
    cfg.filter_eps = kFp16MinPositive;
    return cfg;
  }
};

// Fused linear-log-sum-exp over the full catalog. Logits are computed tile
// by tile and discarded; only the per-row positive logit and LSE survive, so
// retained memory is 2N scalars no matter how large the catalog is.
LossOutput cce_forward(const DenseMatrix& E, const DenseMatrix& C,
                       std::span<const std::int64_t> x, const CceConfig& cfg = {},
                       MemAccountant* acct = nullptr);

struct CceBackwardResult {
  GradPair grads;
  // Fraction of off-target (row, item) pairs whose softmax value fell below
  // filter_eps and were skipped; 0 when filter_eps == 0.
  double skipped_fraction = 0.0;
};

// Recomputes logits tile by tile from (E, C), forms softmax values against
// the stored LSE, and accumulates both gradients. With filter_eps > 0,
// off-target softmax entries below the threshold are treated as exact zeros
// and skipped; the row's own target is never filtered.
CceBackwardResult cce_backward(const DenseMatrix& E, const DenseMatrix& C,
                               std::span<const std::int64_t> x, std::span<const double> lse,
                               double upstream, const CceConfig& cfg = {},
                               MemAccountant* acct = nullptr);

}  // namespace lseforge
