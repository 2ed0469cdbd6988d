#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "lseforge/adam.hpp"
#include "lseforge/backend.hpp"
#include "lseforge/encoder.hpp"
#include "lseforge/metrics.hpp"
#include "lseforge/sampler.hpp"
#include "lseforge/split.hpp"

namespace lseforge {

enum class NegSampler { kUniform, kPopularity };

// Everything the end-to-end harness needs to run one configuration.
struct HarnessConfig {
  Backend backend = Backend::kCce;
  std::size_t batch_size = 32;   // training windows per optimizer step
  std::size_t max_seq_len = 20;  // window length cap (chunks of each sequence)
  std::size_t ns = 0;            // negatives per row; sampled backends only
  double filter_eps = 0.0;       // gradient filtering threshold; cce only
  NegSampler sampler = NegSampler::kUniform;
  double popularity_exponent = 1.0;
  AdamConfig adam;
  std::size_t hidden = 32;
  std::uint64_t seed = 0;
  int workers = 0;
  std::size_t row_block = 128;
  std::size_t col_block = 256;
  std::size_t eval_k = 10;
};

// Throws std::invalid_argument on inconsistent settings (usage errors a CLI
// should surface before any work starts).
void validate_harness_config(const HarnessConfig& cfg);

// Training windows: each sequence is chunked front to back into
// non-overlapping pieces of at most max_len items; pieces shorter than 2
// items are dropped (they contain no prediction step).
std::vector<std::vector<std::int64_t>> make_training_windows(std::span<const Sequence> train,
                                                             std::size_t max_len);

// One line of the training log. Validation metrics are computed after the
// epoch's optimizer steps at depth eval_k (the field names carry the default
// depth 10); they are zero when the split has no validation pairs.
// retained_bytes / scratch_bytes are the worst single batch's loss-layer
// peaks at 4-byte reals; wall_ms covers the optimization pass only.
// skipped_fraction is the row-weighted mean over batches (always 0 for
// backends without gradient filtering).
struct EpochReport {
  std::size_t epoch = 0;
  Backend backend = Backend::kCce;
  double loss = 0.0;
  double wall_ms = 0.0;
  std::uint64_t retained_bytes = 0;
  std::uint64_t scratch_bytes = 0;
  double ndcg10 = 0.0;
  double coverage10 = 0.0;
  double surprisal10 = 0.0;
  double skipped_fraction = 0.0;
};

// Runs one epoch in place: shuffles the window order (seeded by cfg.seed and
// `epoch` only, so run N epochs and epoch N stand-alone see identical data),
// steps the optimizer once per batch, then scores the validation pairs.
EpochReport train_epoch(ToyEncoderParams& params, AdamState& adam, const SplitSpec& split,
                        const PopularityTable& pop, const HarnessConfig& cfg, std::size_t epoch);

struct TrainOutcome {
  std::vector<EpochReport> epochs;
  EvalSummary test_metrics;  // zeros when the split has no test pairs
  bool has_test_metrics = false;
  ToyEncoderParams params;
};

// Fresh parameters + optimizer, n_epochs of training, final test-set scoring.
TrainOutcome run_training(const SplitSpec& split, const PopularityTable& pop,
                          const HarnessConfig& cfg, std::size_t n_epochs);

// Distribution of |d_classifier| entries from one reference-backend gradient
// on the first batch_size training windows (unshuffled). fractions[i] is the
// share of entries in [edges[i-1], edges[i]) with open ends below edges[0]
// and at or above edges.back(); below_fp16_min is the share under the
// smallest positive half-precision value.
struct GradHistogram {
  std::array<double, 5> edges{1e-10, 1e-8, 1e-6, 1e-4, 1e-2};
  std::array<double, 6> fractions{};
  double below_fp16_min = 0.0;
  std::size_t total_entries = 0;
};

GradHistogram classifier_gradient_histogram(const ToyEncoderParams& params, const SplitSpec& split,
                                            const HarnessConfig& cfg, double upstream = 1.0);

}  // namespace lseforge
