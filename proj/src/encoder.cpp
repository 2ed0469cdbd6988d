#include "lseforge/encoder.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lseforge {

namespace {

void check_item(std::int64_t item, std::size_t catalog, const char* where) {
  if (item < 0 || static_cast<std::size_t>(item) >= catalog) {
    throw std::out_of_range(std::string(where) + ": item id " + std::to_string(item) +
                            " outside catalog of size " + std::to_string(catalog));
  }
}

}  // namespace

ToyEncoderParams ToyEncoderParams::Init(std::size_t catalog, std::size_t hidden,
                                        const SplitMix64& rng) {
  if (catalog == 0 || hidden == 0) {
    throw std::invalid_argument("encoder init: catalog and hidden must be >= 1");
  }
  ToyEncoderParams p;
  p.emb = DenseMatrix(catalog, hidden);
  p.w = DenseMatrix(hidden, hidden);
  p.b.assign(hidden, 0.0f);
  p.c = DenseMatrix(hidden, catalog);

  const double scale = 0.1 / std::sqrt(static_cast<double>(hidden));
  SplitMix64 stream = rng;  // copy: consume a private continuation of the stream
  auto draw = [&]() { return static_cast<float>((2.0 * stream.uniform() - 1.0) * scale); };
  for (std::size_t i = 0; i < p.emb.size(); ++i) p.emb.data()[i] = draw();
  for (std::size_t i = 0; i < p.w.size(); ++i) p.w.data()[i] = draw();
  for (std::size_t i = 0; i < p.c.size(); ++i) p.c.data()[i] = draw();
  return p;
}

std::vector<double> encode(const ToyEncoderParams& params, std::span<const std::int64_t> prefix) {
  if (prefix.empty()) {
    throw std::invalid_argument("encode: prefix must contain at least one item");
  }
  const std::size_t d = params.hidden();
  std::vector<double> a(d, 0.0);
  for (std::int64_t item : prefix) {
    check_item(item, params.catalog(), "encode");
    const float* row = params.emb.row_ptr(static_cast<std::size_t>(item));
    for (std::size_t k = 0; k < d; ++k) a[k] += static_cast<double>(row[k]);
  }
  const double inv = 1.0 / static_cast<double>(prefix.size());
  for (std::size_t k = 0; k < d; ++k) a[k] *= inv;

  std::vector<double> h(d, 0.0);
  for (std::size_t r = 0; r < d; ++r) {
    double z = static_cast<double>(params.b[r]);
    const float* wrow = params.w.row_ptr(r);
    for (std::size_t k = 0; k < d; ++k) z += static_cast<double>(wrow[k]) * a[k];
    h[r] = std::tanh(z);
  }
  return h;
}

EncodedBatch encode_batch(const ToyEncoderParams& params,
                          std::span<const std::vector<std::int64_t>> windows) {
  const std::size_t d = params.hidden();
  std::size_t rows = 0;
  for (const auto& win : windows) {
    if (win.size() < 2) {
      throw std::invalid_argument("encode_batch: every window needs at least 2 items");
    }
    rows += win.size() - 1;
  }
  if (rows == 0) {
    throw std::invalid_argument("encode_batch: batch is empty");
  }

  EncodedBatch out;
  out.e = DenseMatrix(rows, d);
  out.a = DenseMatrixD(rows, d);
  out.h = DenseMatrixD(rows, d);
  out.targets.resize(rows);
  out.window_of.resize(rows);
  out.position_of.resize(rows);

  std::size_t r = 0;
  std::vector<double> sum(d);
  for (std::size_t wi = 0; wi < windows.size(); ++wi) {
    const auto& win = windows[wi];
    sum.assign(d, 0.0);
    for (std::size_t t = 1; t < win.size(); ++t) {
      check_item(win[t - 1], params.catalog(), "encode_batch");
      check_item(win[t], params.catalog(), "encode_batch");
      const float* erow = params.emb.row_ptr(static_cast<std::size_t>(win[t - 1]));
      for (std::size_t k = 0; k < d; ++k) sum[k] += static_cast<double>(erow[k]);
      const double inv = 1.0 / static_cast<double>(t);

      double* arow = out.a.row_ptr(r);
      double* hrow = out.h.row_ptr(r);
      float* frow = out.e.row_ptr(r);
      for (std::size_t j = 0; j < d; ++j) arow[j] = sum[j] * inv;
      for (std::size_t j = 0; j < d; ++j) {
        double z = static_cast<double>(params.b[j]);
        const float* wrow = params.w.row_ptr(j);
        for (std::size_t k = 0; k < d; ++k) z += static_cast<double>(wrow[k]) * arow[k];
        hrow[j] = std::tanh(z);
        frow[j] = static_cast<float>(hrow[j]);
      }
      out.targets[r] = win[t];
      out.window_of[r] = wi;
      out.position_of[r] = t;
      ++r;
    }
  }
  return out;
}

void encoder_backward(const ToyEncoderParams& params,
                      std::span<const std::vector<std::int64_t>> windows,
                      const EncodedBatch& batch, const DenseMatrixD& d_h, EncoderGrads& grads) {
  const std::size_t d = params.hidden();
  if (d_h.rows() != batch.h.rows() || d_h.cols() != d) {
    throw std::invalid_argument("encoder_backward: d_h shape does not match the batch");
  }
  if (grads.d_emb.rows() != params.catalog() || grads.d_emb.cols() != d) {
    throw std::invalid_argument("encoder_backward: gradient buffers do not match the parameters");
  }

  std::vector<double> g(d);
  std::vector<double> u(d);
  // Rows of one window are contiguous and position-ascending by construction,
  // so walk each window's row span backwards to build the suffix sum
  // S_t = Σ_{t' ≥ t} (1/t')·Wᵀ·g_{t'}; item at 0-based position p feeds every
  // pooled mean with t ≥ p+1, hence d_emb[x_p] += S_{p+1}.
  std::size_t row_end = batch.h.rows();
  while (row_end > 0) {
    const std::size_t wi = batch.window_of[row_end - 1];
    std::size_t row_begin = row_end;
    while (row_begin > 0 && batch.window_of[row_begin - 1] == wi) --row_begin;
    const auto& win = windows[wi];

    std::vector<double> suffix(d, 0.0);
    for (std::size_t r = row_end; r-- > row_begin;) {
      const std::size_t t = batch.position_of[r];
      const double* hrow = batch.h.row_ptr(r);
      const double* dh = d_h.row_ptr(r);
      for (std::size_t j = 0; j < d; ++j) g[j] = (1.0 - hrow[j] * hrow[j]) * dh[j];

      const double* arow = batch.a.row_ptr(r);
      double* db = grads.d_b.data();
      for (std::size_t j = 0; j < d; ++j) {
        double* dwrow = grads.d_w.row_ptr(j);
        for (std::size_t k = 0; k < d; ++k) dwrow[k] += g[j] * arow[k];
        db[j] += g[j];
      }

      const double inv = 1.0 / static_cast<double>(t);
      for (std::size_t k = 0; k < d; ++k) {
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          acc += static_cast<double>(params.w(j, k)) * g[j];
        }
        u[k] = acc * inv;
      }
      for (std::size_t k = 0; k < d; ++k) suffix[k] += u[k];

      // suffix now equals S_t; it is owed to the item entering at position t−1.
      double* derow = grads.d_emb.row_ptr(static_cast<std::size_t>(win[t - 1]));
      for (std::size_t k = 0; k < d; ++k) derow[k] += suffix[k];
    }
    row_end = row_begin;
  }
}

}  // namespace lseforge
