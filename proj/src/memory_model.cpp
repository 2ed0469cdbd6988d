#include "lseforge/memory_model.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace lseforge {

namespace {

void validate(const MemoryModel& m) {
  if (m.n < 1 || m.catalog < 1 || m.hidden < 1 || m.row_block < 1 || m.col_block < 1) {
    throw std::invalid_argument("MemoryModel: n, catalog, hidden, and block sizes must be >= 1");
  }
  if (m.dtype_bytes != 2 && m.dtype_bytes != 4) {
    throw std::invalid_argument("MemoryModel: dtype_bytes must be 2 or 4, got " +
                                std::to_string(m.dtype_bytes));
  }
  if (!backend_is_sampled(m.backend) && m.ns != 0) {
    throw std::invalid_argument("MemoryModel: ns is only meaningful for sampled backends");
  }
}

}  // namespace

ModelScalars model_scalars(const MemoryModel& m) {
  validate(m);
  const std::uint64_t n = m.n;
  const std::uint64_t v = m.catalog;
  const std::uint64_t d = m.hidden;
  const std::uint64_t w = 1 + m.ns;
  const std::uint64_t rb = std::min<std::uint64_t>(m.row_block, n);
  const std::uint64_t cb = std::min<std::uint64_t>(m.col_block, v);

  ModelScalars s;
  switch (m.backend) {
    case Backend::kCe:
      // Materialized logit matrix plus the LSE vector; no tile scratch.
      s.retained_real = n * v + n;
      break;
    case Backend::kCem:
      // Candidate logits, LSE, and the candidate index matrix.
      s.retained_real = n * w + n;
      s.retained_index = n * w;
      break;
    case Backend::kCce:
      // Positive logits + LSE only; scratch is one logit tile, one staged
      // column block, and the per-row running sums (forward dominates the
      // backward passes, which drop the running sums).
      s.retained_real = 2 * n;
      s.scratch_real = rb * cb + cb * d + rb;
      break;
    case Backend::kCcem:
      // Positive logits + LSE + candidate indices; scratch is the larger of
      // the forward stage (one column + online state) and the backward stage
      // (coefficient matrix + one column + one logit).
      s.retained_real = 2 * n;
      s.retained_index = n * w;
      s.scratch_real = std::max<std::uint64_t>(d + 3, n * w + d + 1);
      break;
    case Backend::kBce:
      // One positive and one negative logit per row, plus the negative index.
      s.retained_real = 2 * n;
      s.retained_index = n;
      break;
  }
  return s;
}

PeakBytes peak_bytes(const MemoryModel& m) {
  const ModelScalars s = model_scalars(m);
  return {s.retained_real * m.dtype_bytes + s.retained_index * kIndexBytes,
          s.scratch_real * m.dtype_bytes};
}

}  // namespace lseforge
