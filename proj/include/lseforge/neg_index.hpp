#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace lseforge {

// Per-row candidate sets for the sampled losses. Row i holds 1 + ns item
// indices: slot 0 is the row's positive (next-item) target, slots 1..ns are
// sampled negatives. Negatives may repeat each other (sampling is with
// replacement) but must never equal the row's positive.
class NegIndexMatrix {
 public:
  NegIndexMatrix() = default;
  NegIndexMatrix(std::size_t rows, std::size_t width)
      : rows_(rows), width_(width), idx_(rows * width, 0) {}

  std::size_t rows() const { return rows_; }
  std::size_t width() const { return width_; }
  std::size_t n_negatives() const { return width_ ? width_ - 1 : 0; }

  std::int64_t& operator()(std::size_t r, std::size_t s) { return idx_[r * width_ + s]; }
  std::int64_t operator()(std::size_t r, std::size_t s) const { return idx_[r * width_ + s]; }

  std::span<const std::int64_t> row(std::size_t r) const { return {idx_.data() + r * width_, width_}; }
  std::span<std::int64_t> row(std::size_t r) { return {idx_.data() + r * width_, width_}; }

  std::int64_t positive(std::size_t r) const { return idx_[r * width_]; }

  const std::vector<std::int64_t>& data() const { return idx_; }

  // Throws std::invalid_argument naming the offending row if any index falls
  // outside [0, catalog) or a negative slot repeats the row's positive.
  void validate(std::size_t catalog) const;

 private:
  std::size_t rows_ = 0;
  std::size_t width_ = 0;
  std::vector<std::int64_t> idx_;
};

}  // namespace lseforge
