#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lseforge/matrix.hpp"
#include "lseforge/rng.hpp"

namespace lseforge {

// Mean-pooling tanh encoder with an untied linear classifier head:
// a_t = mean of the first t item embeddings, h_t = tanh(W·a_t + b), and the
// loss layer scores h against C. Small enough for closed-form gradients,
// shaped like the real thing: the loss backends only ever see (E, C).
struct ToyEncoderParams {
  DenseMatrix emb;       // catalog × hidden item embeddings
  DenseMatrix w;         // hidden × hidden
  std::vector<float> b;  // hidden
  DenseMatrix c;         // hidden × catalog classifier

  std::size_t catalog() const { return emb.rows(); }
  std::size_t hidden() const { return emb.cols(); }

  // Emb, W, C ~ uniform(−0.1/√hidden, 0.1/√hidden), b = 0. Draw order: Emb
  // row-major, then W, then C.
  static ToyEncoderParams Init(std::size_t catalog, std::size_t hidden, const SplitMix64& rng);
};

// Hidden state for the final position of the prefix. Accumulation in double;
// errors on an empty prefix or out-of-range item.
std::vector<double> encode(const ToyEncoderParams& params, std::span<const std::int64_t> prefix);

// Gradients of the full objective with respect to every parameter tensor.
struct EncoderGrads {
  DenseMatrixD d_emb;          // catalog × hidden
  DenseMatrixD d_w;            // hidden × hidden
  std::vector<double> d_b;     // hidden
  DenseMatrixD d_classifier;   // hidden × catalog

  EncoderGrads(std::size_t catalog, std::size_t hidden)
      : d_emb(catalog, hidden), d_w(hidden, hidden), d_b(hidden, 0.0),
        d_classifier(hidden, catalog) {}
};

// Forward activations for one batch of training windows, one row per valid
// position (positions 1..len−1 of each window; the row's target is the next
// item). a and h are kept in double for the backward pass; e is the float
// image of h that the loss kernels consume.
struct EncodedBatch {
  DenseMatrix e;                         // rows × hidden, float storage
  DenseMatrixD a;                        // rows × hidden, pooled means
  DenseMatrixD h;                        // rows × hidden, tanh outputs
  std::vector<std::int64_t> targets;     // rows
  std::vector<std::size_t> window_of;    // rows → index into `windows`
  std::vector<std::size_t> position_of;  // rows → t (1-based prefix length)
};

EncodedBatch encode_batch(const ToyEncoderParams& params,
                          std::span<const std::vector<std::int64_t>> windows);

// Chain rule from d_loss/d_h rows back to Emb, W, b, walking each window's
// positions with the suffix-sum of (1/t)·Wᵀ·g_t. Accumulates into grads.
void encoder_backward(const ToyEncoderParams& params,
                      std::span<const std::vector<std::int64_t>> windows,
                      const EncodedBatch& batch, const DenseMatrixD& d_h, EncoderGrads& grads);

}  // namespace lseforge
