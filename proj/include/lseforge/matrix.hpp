#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lseforge {

// Dense row-major matrix. Element type is the storage width; all reductions
// that consume a matrix accumulate in double regardless of storage width.
template <typename Scalar>
class MatrixT {
 public:
  MatrixT() = default;

  MatrixT(std::size_t rows, std::size_t cols, Scalar fill = Scalar{0})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static MatrixT FromRows(std::initializer_list<std::initializer_list<double>> rows) {
    MatrixT m(rows.size(), rows.size() ? rows.begin()->size() : 0);
    std::size_t r = 0;
    for (const auto& row : rows) {
      if (row.size() != m.cols_) {
        throw std::invalid_argument("MatrixT::FromRows: row " + std::to_string(r) +
                                    " has " + std::to_string(row.size()) +
                                    " entries, expected " + std::to_string(m.cols_));
      }
      std::size_t c = 0;
      for (double v : row) m.data_[r * m.cols_ + c++] = static_cast<Scalar>(v);
      ++r;
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  Scalar& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  Scalar operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  Scalar& at(std::size_t r, std::size_t c) {
    check_bounds(r, c);
    return data_[r * cols_ + c];
  }
  Scalar at(std::size_t r, std::size_t c) const {
    check_bounds(r, c);
    return data_[r * cols_ + c];
  }

  Scalar* row_ptr(std::size_t r) { return data_.data() + r * cols_; }
  const Scalar* row_ptr(std::size_t r) const { return data_.data() + r * cols_; }

  std::span<Scalar> row(std::size_t r) { return {row_ptr(r), cols_}; }
  std::span<const Scalar> row(std::size_t r) const { return {row_ptr(r), cols_}; }

  std::vector<Scalar>& data() { return data_; }
  const std::vector<Scalar>& data() const { return data_; }

  bool all_finite() const {
    for (Scalar v : data_) {
      if (!std::isfinite(static_cast<double>(v))) return false;
    }
    return true;
  }

  void fill(Scalar v) { data_.assign(data_.size(), v); }

 private:
  void check_bounds(std::size_t r, std::size_t c) const {
    if (r >= rows_ || c >= cols_) {
      throw std::out_of_range("MatrixT::at: (" + std::to_string(r) + ", " + std::to_string(c) +
                              ") out of bounds for " + std::to_string(rows_) + "x" +
                              std::to_string(cols_));
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Scalar> data_;
};

// Model parameters and activations are stored in 32-bit floats; gradients and
// reduction results live in 64-bit doubles.
using DenseMatrix = MatrixT<float>;
using DenseMatrixD = MatrixT<double>;

// Read-only strided view into a matrix, used to address tiles without copying.
template <typename Scalar>
struct MatView {
  const Scalar* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t stride = 0;  // elements between consecutive rows

  static MatView Of(const MatrixT<Scalar>& m) {
    return {m.data().data(), m.rows(), m.cols(), m.cols()};
  }

  MatView block(std::size_t r0, std::size_t nrows, std::size_t c0, std::size_t ncols) const {
    if (r0 + nrows > rows || c0 + ncols > cols) {
      throw std::out_of_range("MatView::block: [" + std::to_string(r0) + "+" +
                              std::to_string(nrows) + ", " + std::to_string(c0) + "+" +
                              std::to_string(ncols) + ") exceeds " + std::to_string(rows) + "x" +
                              std::to_string(cols));
    }
    return {data + r0 * stride + c0, nrows, ncols, stride};
  }

  const Scalar* row_ptr(std::size_t r) const { return data + r * stride; }
};

// a (n x k) times b (k x m), accumulated in double per output element.
// Deterministic: the inner sum always runs in ascending index order.
template <typename A, typename B>
DenseMatrixD matmul_block(const MatView<A>& a, const MatView<B>& b) {
  if (a.cols != b.rows) {
    throw std::invalid_argument("matmul_block: inner dimensions disagree (" +
                                std::to_string(a.rows) + "x" + std::to_string(a.cols) + " vs " +
                                std::to_string(b.rows) + "x" + std::to_string(b.cols) + ")");
  }
  DenseMatrixD out(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const A* arow = a.row_ptr(i);
    double* orow = out.row_ptr(i);
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double av = static_cast<double>(arow[k]);
      const B* brow = b.row_ptr(k);
      for (std::size_t j = 0; j < b.cols; ++j) {
        orow[j] += av * static_cast<double>(brow[j]);
      }
    }
  }
  return out;
}

template <typename A, typename B>
DenseMatrixD matmul_block(const MatrixT<A>& a, const MatrixT<B>& b) {
  return matmul_block(MatView<A>::Of(a), MatView<B>::Of(b));
}

}  // namespace lseforge
