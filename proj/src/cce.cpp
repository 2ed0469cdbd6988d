#include "lseforge/cce.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "lseforge/threads.hpp"

namespace lseforge {

namespace {

void validate_config(const CceConfig& cfg) {
  if (cfg.row_block < 1 || cfg.col_block < 1) {
    throw std::invalid_argument("CceConfig: block sizes must be >= 1 (row_block=" +
                                std::to_string(cfg.row_block) + ", col_block=" +
                                std::to_string(cfg.col_block) + ")");
  }
  if (!(cfg.filter_eps >= 0.0)) {
    throw std::invalid_argument("CceConfig: filter_eps must be >= 0, got " +
                                std::to_string(cfg.filter_eps));
  }
}

// Contiguous copy of the catalog columns [c0, c0+cbn): cblk[k*cbn + j] holds
// C(k, c0+j). Kernels never read C's strided columns directly — the copy is
// the on-chip staging buffer.
void copy_col_block(const DenseMatrix& C, std::size_t c0, std::size_t cbn, float* cblk) {
  for (std::size_t k = 0; k < C.rows(); ++k) {
    std::memcpy(cblk + k * cbn, C.row_ptr(k) + c0, cbn * sizeof(float));
  }
}

// tile[i*cbn + j] = Σ_k E(r0+i, k) · cblk[k*cbn + j], k ascending, so every
// logit is produced with an identical operand order wherever it is computed.
void logit_tile(const DenseMatrix& E, std::size_t r0, std::size_t nb, const float* cblk,
                std::size_t cbn, double* tile) {
  const std::size_t d = E.cols();
  std::fill(tile, tile + nb * cbn, 0.0);
  for (std::size_t i = 0; i < nb; ++i) {
    const float* erow = E.row_ptr(r0 + i);
    double* trow = tile + i * cbn;
    for (std::size_t k = 0; k < d; ++k) {
      const double e = erow[k];
      const float* crow = cblk + k * cbn;
      for (std::size_t j = 0; j < cbn; ++j) {
        trow[j] += e * static_cast<double>(crow[j]);
      }
    }
  }
}

struct WorkerScratch {
  std::vector<double> tile;
  std::vector<float> cblk;
  std::vector<double> dsum;
};

}  // namespace

LossOutput cce_forward(const DenseMatrix& E, const DenseMatrix& C,
                       std::span<const std::int64_t> x, const CceConfig& cfg,
                       MemAccountant* acct) {
  validate_loss_inputs(E, C, x);
  validate_config(cfg);
  const std::size_t n = E.rows();
  const std::size_t d = E.cols();
  const std::size_t v = C.cols();
  const std::size_t rb = std::min(cfg.row_block, n);
  const std::size_t cb = std::min(cfg.col_block, v);
  const std::size_t n_row_blocks = (n + rb - 1) / rb;
  const std::size_t n_col_blocks = (v + cb - 1) / cb;
  const std::size_t workers = effective_workers(n_row_blocks, resolve_worker_count(cfg.workers));

  const std::size_t scratch_per_worker = rb * cb + cb * d + rb;
  if (acct) {
    acct->record_ensure("retained/cce/pos_logits", n);
    acct->record_ensure("retained/cce/lse", n);
    acct->record_alloc("scratch/cce/forward", workers * scratch_per_worker);
  }

  LossOutput out;
  out.pos_logits.resize(n);
  // The LSE vector doubles as the running-max store while the sweep is in
  // flight; the final log(d) fold turns it into the true LSE.
  out.lse.assign(n, -std::numeric_limits<double>::infinity());

  std::vector<WorkerScratch> scratch(workers);
  for (auto& s : scratch) {
    s.tile.resize(rb * cb);
    s.cblk.resize(cb * d);
    s.dsum.resize(rb);
  }

  parallel_blocks(n_row_blocks, static_cast<int>(workers), [&](std::size_t worker, std::size_t b) {
    WorkerScratch& s = scratch[worker];
    const std::size_t r0 = b * rb;
    const std::size_t nb = std::min(rb, n - r0);
    std::fill(s.dsum.begin(), s.dsum.begin() + nb, 0.0);

    for (std::size_t cI = 0; cI < n_col_blocks; ++cI) {
      const std::size_t c0 = cI * cb;
      const std::size_t cbn = std::min(cb, v - c0);
      copy_col_block(C, c0, cbn, s.cblk.data());
      logit_tile(E, r0, nb, s.cblk.data(), cbn, s.tile.data());

      for (std::size_t i = 0; i < nb; ++i) {
        const std::size_t row = r0 + i;
        const double* trow = s.tile.data() + i * cbn;
        double m = out.lse[row];
        double dsum = s.dsum[i];
        for (std::size_t j = 0; j < cbn; ++j) {
          const double o = trow[j];
          if (o <= m) {
            dsum += std::exp(o - m);
          } else {
            dsum = dsum * std::exp(m - o) + 1.0;
            m = o;
          }
        }
        out.lse[row] = m;
        s.dsum[i] = dsum;

        const auto xi = static_cast<std::size_t>(x[row]);
        if (xi >= c0 && xi < c0 + cbn) {
          out.pos_logits[row] = trow[xi - c0];
        }
      }
    }
    for (std::size_t i = 0; i < nb; ++i) {
      out.lse[r0 + i] += std::log(s.dsum[i]);
    }
  });

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += out.lse[i] - out.pos_logits[i];
  out.loss = total / static_cast<double>(n);

  if (acct) acct->record_free("scratch/cce/forward", workers * scratch_per_worker);
  return out;
}

CceBackwardResult cce_backward(const DenseMatrix& E, const DenseMatrix& C,
                               std::span<const std::int64_t> x, std::span<const double> lse,
                               double upstream, const CceConfig& cfg, MemAccountant* acct) {
  validate_loss_inputs(E, C, x);
  validate_config(cfg);
  if (lse.size() != E.rows()) {
    throw std::invalid_argument("cce_backward: LSE vector has " + std::to_string(lse.size()) +
                                " entries for " + std::to_string(E.rows()) + " rows");
  }
  const std::size_t n = E.rows();
  const std::size_t d = E.cols();
  const std::size_t v = C.cols();
  const std::size_t rb = std::min(cfg.row_block, n);
  const std::size_t cb = std::min(cfg.col_block, v);
  const std::size_t n_row_blocks = (n + rb - 1) / rb;
  const std::size_t n_col_blocks = (v + cb - 1) / cb;
  const int requested = resolve_worker_count(cfg.workers);
  const std::size_t workers =
      std::max(effective_workers(n_row_blocks, requested), effective_workers(n_col_blocks, requested));

  const std::size_t scratch_per_worker = rb * cb + cb * d;
  if (acct) {
    acct->record_ensure("retained/cce/lse", n);
    acct->record_alloc("scratch/cce/backward", workers * scratch_per_worker);
  }

  CceBackwardResult out{{DenseMatrixD(n, d), DenseMatrixD(d, v)}, 0.0};
  const double scale = upstream / static_cast<double>(n);
  const double eps = cfg.filter_eps;

  std::vector<WorkerScratch> scratch(workers);
  for (auto& s : scratch) {
    s.tile.resize(rb * cb);
    s.cblk.resize(cb * d);
  }

  // Turns a row of recomputed logits into gradient coefficients in place:
  // softmax value s against the stored LSE, minus 1 at the row's target,
  // times upstream/N. Off-target values below filter_eps become exact zeros
  // (their contribution is dropped); the target slot is never filtered.
  // Identical inputs take identical branches, so both passes agree on which
  // entries are skipped.
  auto coefficients = [&](double* trow, std::size_t row, std::size_t c0, std::size_t cbn,
                          std::uint64_t* skips) {
    const double row_lse = lse[row];
    const auto xi = static_cast<std::int64_t>(x[row]);
    for (std::size_t j = 0; j < cbn; ++j) {
      const double s = std::exp(trow[j] - row_lse);
      if (static_cast<std::int64_t>(c0 + j) == xi) {
        trow[j] = (s - 1.0) * scale;
      } else if (eps > 0.0 && s < eps) {
        trow[j] = 0.0;
        if (skips) ++*skips;
      } else {
        trow[j] = s * scale;
      }
    }
  };

  // Pass 1 — embedding gradients. Each worker owns whole row blocks, so
  // every d_embeddings row is written by exactly one worker in ascending
  // column-block order regardless of worker count.
  std::vector<std::uint64_t> block_skips(n_row_blocks, 0);
  parallel_blocks(n_row_blocks, static_cast<int>(workers), [&](std::size_t worker, std::size_t b) {
    WorkerScratch& s = scratch[worker];
    const std::size_t r0 = b * rb;
    const std::size_t nb = std::min(rb, n - r0);
    for (std::size_t cI = 0; cI < n_col_blocks; ++cI) {
      const std::size_t c0 = cI * cb;
      const std::size_t cbn = std::min(cb, v - c0);
      copy_col_block(C, c0, cbn, s.cblk.data());
      logit_tile(E, r0, nb, s.cblk.data(), cbn, s.tile.data());
      for (std::size_t i = 0; i < nb; ++i) {
        coefficients(s.tile.data() + i * cbn, r0 + i, c0, cbn, &block_skips[b]);
      }
      for (std::size_t i = 0; i < nb; ++i) {
        const double* trow = s.tile.data() + i * cbn;
        double* derow = out.grads.d_embeddings.row_ptr(r0 + i);
        for (std::size_t k = 0; k < d; ++k) {
          const float* crow = s.cblk.data() + k * cbn;
          double acc = 0.0;
          for (std::size_t j = 0; j < cbn; ++j) acc += trow[j] * static_cast<double>(crow[j]);
          derow[k] += acc;
        }
      }
    }
  });

  // Pass 2 — classifier gradients. Each worker owns whole column blocks and
  // walks all row blocks in ascending order, so every d_classifier column
  // accumulates rows 0..N−1 in the same order for any worker count. The
  // logit tiles are recomputed with the same operand order as pass 1, so the
  // filtering decisions are bitwise identical.
  parallel_blocks(n_col_blocks, static_cast<int>(workers), [&](std::size_t worker, std::size_t cI) {
    WorkerScratch& s = scratch[worker];
    const std::size_t c0 = cI * cb;
    const std::size_t cbn = std::min(cb, v - c0);
    copy_col_block(C, c0, cbn, s.cblk.data());
    for (std::size_t b = 0; b < n_row_blocks; ++b) {
      const std::size_t r0 = b * rb;
      const std::size_t nb = std::min(rb, n - r0);
      logit_tile(E, r0, nb, s.cblk.data(), cbn, s.tile.data());
      for (std::size_t i = 0; i < nb; ++i) {
        coefficients(s.tile.data() + i * cbn, r0 + i, c0, cbn, nullptr);
      }
      for (std::size_t i = 0; i < nb; ++i) {
        const double* trow = s.tile.data() + i * cbn;
        const float* erow = E.row_ptr(r0 + i);
        for (std::size_t k = 0; k < d; ++k) {
          double* dcrow = out.grads.d_classifier.row_ptr(k) + c0;
          const double e = erow[k];
          for (std::size_t j = 0; j < cbn; ++j) dcrow[j] += e * trow[j];
        }
      }
    }
  });

  std::uint64_t skipped = 0;
  for (std::uint64_t c : block_skips) skipped += c;
  const std::uint64_t off_target = static_cast<std::uint64_t>(n) * (v - 1);
  out.skipped_fraction =
      off_target == 0 ? 0.0 : static_cast<double>(skipped) / static_cast<double>(off_target);

  if (acct) acct->record_free("scratch/cce/backward", workers * scratch_per_worker);
  return out;
}

}  // namespace lseforge
