#pragma once

#include <cstdint>

#include "lseforge/accountant.hpp"
#include "lseforge/backend.hpp"

namespace lseforge {

// What-if description of one loss-layer configuration. N is the number of
// valid positions (batch size x positions per sequence window). The closed
// forms below describe a single worker; parallel runs add one scratch set
// per extra worker, which the runtime accountant reports directly.
struct MemoryModel {
  Backend backend = Backend::kCe;
  std::size_t n = 1;        // rows of E
  std::size_t catalog = 1;  // V
  std::size_t hidden = 1;   // D
  std::size_t ns = 0;       // negatives per row; nonzero only for sampled backends
  std::size_t dtype_bytes = 4;  // storage width of one real scalar: 2 or 4
  std::size_t row_block = 128;
  std::size_t col_block = 256;
};

// Exact scalar counts the instrumented kernels will report for this model.
struct ModelScalars {
  std::uint64_t retained_real = 0;
  std::uint64_t retained_index = 0;
  std::uint64_t scratch_real = 0;
};

ModelScalars model_scalars(const MemoryModel& model);

struct PeakBytes {
  std::uint64_t retained = 0;
  std::uint64_t scratch = 0;
};

// Byte view of model_scalars: real scalars at dtype_bytes, indices at 8.
PeakBytes peak_bytes(const MemoryModel& model);

}  // namespace lseforge
