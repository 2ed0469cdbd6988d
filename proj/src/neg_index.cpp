#include "lseforge/neg_index.hpp"

#include <stdexcept>
#include <string>

namespace lseforge {

void NegIndexMatrix::validate(std::size_t catalog) const {
  if (width_ == 0) {
    throw std::invalid_argument("NegIndexMatrix: width must be at least 1 (the positive slot)");
  }
  for (std::size_t r = 0; r < rows_; ++r) {
    const std::int64_t pos = idx_[r * width_];
    for (std::size_t s = 0; s < width_; ++s) {
      const std::int64_t v = idx_[r * width_ + s];
      if (v < 0 || static_cast<std::size_t>(v) >= catalog) {
        throw std::invalid_argument("NegIndexMatrix: row " + std::to_string(r) + " slot " +
                                    std::to_string(s) + " holds " + std::to_string(v) +
                                    ", outside catalog of " + std::to_string(catalog));
      }
      if (s > 0 && v == pos) {
        throw std::invalid_argument("NegIndexMatrix: row " + std::to_string(r) +
                                    " repeats its positive item " + std::to_string(pos) +
                                    " in negative slot " + std::to_string(s));
      }
    }
  }
}

}  // namespace lseforge
