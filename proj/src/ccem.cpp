#include "lseforge/ccem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "lseforge/threads.hpp"

namespace lseforge {

namespace {

void validate_sampled_inputs(const DenseMatrix& E, const DenseMatrix& C,
                             const NegIndexMatrix& inds) {
  if (inds.rows() != E.rows()) {
    throw std::invalid_argument("fused sampled loss: " + std::to_string(inds.rows()) +
                                " candidate rows for " + std::to_string(E.rows()) +
                                " embedding rows");
  }
  if (E.rows() == 0) {
    throw std::invalid_argument("fused sampled loss: zero rows; the mean loss is undefined");
  }
  if (E.cols() != C.rows()) {
    throw std::invalid_argument("fused sampled loss: embedding width " + std::to_string(E.cols()) +
                                " does not match classifier height " + std::to_string(C.rows()));
  }
  inds.validate(C.cols());
}

// Stage one catalog column into the contiguous gather buffer.
void gather_column(const DenseMatrix& C, std::size_t col, float* out) {
  for (std::size_t k = 0; k < C.rows(); ++k) out[k] = C(k, col);
}

double dot_row(const float* erow, const float* col, std::size_t d) {
  double acc = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    acc += static_cast<double>(erow[k]) * static_cast<double>(col[k]);
  }
  return acc;
}

}  // namespace

LossOutput ccem_forward(const DenseMatrix& E, const DenseMatrix& C, const NegIndexMatrix& inds,
                        const CceConfig& cfg, MemAccountant* acct) {
  validate_sampled_inputs(E, C, inds);
  if (cfg.row_block < 1) {
    throw std::invalid_argument("CceConfig: row_block must be >= 1");
  }
  const std::size_t n = E.rows();
  const std::size_t d = E.cols();
  const std::size_t w = inds.width();
  const std::size_t rb = std::min(cfg.row_block, n);
  const std::size_t n_row_blocks = (n + rb - 1) / rb;
  const std::size_t workers = effective_workers(n_row_blocks, resolve_worker_count(cfg.workers));

  // Per worker: one staged column (D) plus the online state (m, d) and the
  // current logit — independent of both ns and the catalog size.
  const std::size_t scratch_per_worker = d + 3;
  if (acct) {
    acct->record_ensure("retained/ccem/pos_logits", n);
    acct->record_ensure("retained/ccem/lse", n);
    acct->record_ensure("retained/ccem/inds", n * w, ScalarKind::kIndex);
    acct->record_alloc("scratch/ccem/forward", workers * scratch_per_worker);
  }

  LossOutput out;
  out.pos_logits.resize(n);
  out.lse.resize(n);

  std::vector<std::vector<float>> columns(workers, std::vector<float>(d));
  parallel_blocks(n_row_blocks, static_cast<int>(workers), [&](std::size_t worker, std::size_t b) {
    float* col = columns[worker].data();
    const std::size_t r0 = b * rb;
    const std::size_t r1 = std::min(r0 + rb, n);
    for (std::size_t i = r0; i < r1; ++i) {
      const float* erow = E.row_ptr(i);
      double m = -std::numeric_limits<double>::infinity();
      double dsum = 0.0;
      for (std::size_t s = 0; s < w; ++s) {
        gather_column(C, static_cast<std::size_t>(inds(i, s)), col);
        const double o = dot_row(erow, col, d);
        if (s == 0) out.pos_logits[i] = o;
        if (o <= m) {
          dsum += std::exp(o - m);
        } else {
          dsum = dsum * std::exp(m - o) + 1.0;
          m = o;
        }
      }
      out.lse[i] = m + std::log(dsum);
    }
  });

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += out.lse[i] - out.pos_logits[i];
  out.loss = total / static_cast<double>(n);

  if (acct) acct->record_free("scratch/ccem/forward", workers * scratch_per_worker);
  return out;
}

GradPair ccem_backward_rows(const DenseMatrix& E, const DenseMatrix& C, const NegIndexMatrix& inds,
                            std::span<const double> lse, std::span<const double> row_upstream,
                            const CceConfig& cfg, MemAccountant* acct) {
  validate_sampled_inputs(E, C, inds);
  if (cfg.row_block < 1) {
    throw std::invalid_argument("CceConfig: row_block must be >= 1");
  }
  const std::size_t n = E.rows();
  if (lse.size() != n) {
    throw std::invalid_argument("ccem_backward: LSE vector has " + std::to_string(lse.size()) +
                                " entries for " + std::to_string(n) + " rows");
  }
  if (row_upstream.size() != n) {
    throw std::invalid_argument("ccem_backward: upstream vector has " +
                                std::to_string(row_upstream.size()) + " entries for " +
                                std::to_string(n) + " rows");
  }
  const std::size_t d = E.cols();
  const std::size_t v = C.cols();
  const std::size_t w = inds.width();
  const std::size_t rb = std::min(cfg.row_block, n);
  const std::size_t n_row_blocks = (n + rb - 1) / rb;
  const int requested = resolve_worker_count(cfg.workers);
  const std::size_t workers = effective_workers(n_row_blocks, requested);

  if (acct) {
    acct->record_ensure("retained/ccem/lse", n);
    acct->record_ensure("retained/ccem/inds", n * w, ScalarKind::kIndex);
    acct->record_alloc("scratch/ccem/coefficients", n * w);
    acct->record_alloc("scratch/ccem/backward", workers * (d + 1));
  }

  GradPair grads{DenseMatrixD(n, d), DenseMatrixD(d, v)};

  // Pass 1 — rows. One staged column per gather serves both the logit
  // recomputation and the d_embeddings update; the softmax-minus-onehot
  // coefficient is kept for the scatter pass.
  DenseMatrixD coeff(n, w);
  std::vector<std::vector<float>> columns(workers, std::vector<float>(d));
  parallel_blocks(n_row_blocks, static_cast<int>(workers), [&](std::size_t worker, std::size_t b) {
    float* col = columns[worker].data();
    const std::size_t r0 = b * rb;
    const std::size_t r1 = std::min(r0 + rb, n);
    for (std::size_t i = r0; i < r1; ++i) {
      const float* erow = E.row_ptr(i);
      double* derow = grads.d_embeddings.row_ptr(i);
      const double row_lse = lse[i];
      const double u = row_upstream[i];
      for (std::size_t s = 0; s < w; ++s) {
        gather_column(C, static_cast<std::size_t>(inds(i, s)), col);
        const double o = dot_row(erow, col, d);
        const double soft = std::exp(o - row_lse);
        const double g = (s == 0 ? soft - 1.0 : soft) * u;
        coeff(i, s) = g;
        for (std::size_t k = 0; k < d; ++k) derow[k] += g * static_cast<double>(col[k]);
      }
    }
  });

  // Pass 2 — columns. The catalog is split into contiguous ranges, one per
  // worker; each scans the whole candidate matrix in ascending (row, slot)
  // order and accumulates only the columns it owns, so every d_classifier
  // column sees the same addition order for any worker count.
  const std::size_t col_workers = effective_workers(v, requested);
  parallel_blocks(col_workers, static_cast<int>(col_workers),
                  [&](std::size_t, std::size_t range) {
                    const auto lo = static_cast<std::int64_t>(v * range / col_workers);
                    const auto hi = static_cast<std::int64_t>(v * (range + 1) / col_workers);
                    for (std::size_t i = 0; i < n; ++i) {
                      const float* erow = E.row_ptr(i);
                      for (std::size_t s = 0; s < w; ++s) {
                        const std::int64_t target = inds(i, s);
                        if (target < lo || target >= hi) continue;
                        const double g = coeff(i, s);
                        const auto column = static_cast<std::size_t>(target);
                        for (std::size_t k = 0; k < d; ++k) {
                          grads.d_classifier(k, column) += g * static_cast<double>(erow[k]);
                        }
                      }
                    }
                  });

  if (acct) {
    acct->record_free("scratch/ccem/coefficients", n * w);
    acct->record_free("scratch/ccem/backward", workers * (d + 1));
  }
  return grads;
}

GradPair ccem_backward(const DenseMatrix& E, const DenseMatrix& C, const NegIndexMatrix& inds,
                       std::span<const double> lse, double upstream, const CceConfig& cfg,
                       MemAccountant* acct) {
  const std::size_t n = E.rows();
  if (n == 0) {
    throw std::invalid_argument("fused sampled loss: zero rows; the mean loss is undefined");
  }
  std::vector<double> row_upstream(n, upstream / static_cast<double>(n));
  return ccem_backward_rows(E, C, inds, lse, row_upstream, cfg, acct);
}

FlopEstimate estimate_flops(std::size_t n, std::size_t d, std::size_t v, std::size_t ns,
                            Backend backend) {
  if (n < 1 || d < 1 || v < 1) {
    throw std::invalid_argument("estimate_flops: N, D, V must all be >= 1");
  }
  std::uint64_t scored = 0;
  std::uint64_t backward_factor = 2;  // gradient products only; logits reused
  switch (backend) {
    case Backend::kCe:
      scored = v;
      break;
    case Backend::kCem:
      scored = 1 + ns;
      break;
    case Backend::kCce:
      scored = v;
      backward_factor = 3;  // one recomputation plus two gradient products
      break;
    case Backend::kCcem:
      scored = 1 + ns;
      backward_factor = 3;
      break;
    case Backend::kBce:
      scored = 2;
      break;
  }
  const std::uint64_t forward = static_cast<std::uint64_t>(n) * d * scored;
  return {forward, backward_factor * forward};
}

}  // namespace lseforge
