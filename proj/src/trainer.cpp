#include "lseforge/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "lseforge/accountant.hpp"
#include "lseforge/cce.hpp"
#include "lseforge/ccem.hpp"
#include "lseforge/losses.hpp"

namespace lseforge {

namespace {

CceConfig tile_config(const HarnessConfig& cfg) {
  CceConfig c;
  c.row_block = cfg.row_block;
  c.col_block = cfg.col_block;
  c.filter_eps = cfg.filter_eps;
  c.workers = cfg.workers;
  return c;
}

std::vector<std::int64_t> sample_bce_negatives(std::span<const std::int64_t> positives,
                                               std::size_t catalog, const SplitMix64& rng) {
  if (catalog < 2) {
    throw std::invalid_argument("bce: catalog must have at least 2 items to sample a negative");
  }
  std::vector<std::int64_t> neg(positives.size());
  for (std::size_t r = 0; r < positives.size(); ++r) {
    SplitMix64 row_rng = rng.derived(static_cast<std::uint64_t>(r));
    bool found = false;
    for (int attempt = 0; attempt < 100; ++attempt) {
      const auto draw = static_cast<std::int64_t>(row_rng.bounded(catalog));
      if (draw != positives[r]) {
        neg[r] = draw;
        found = true;
        break;
      }
    }
    if (!found) {
      throw std::runtime_error("bce: negative sampling exhausted retries at row " +
                               std::to_string(r));
    }
  }
  return neg;
}

struct BatchResult {
  double loss = 0.0;
  double skipped_fraction = 0.0;
  GradPair grads;
};

BatchResult run_loss_layer(const ToyEncoderParams& params, const EncodedBatch& enc,
                           const PopularityTable& pop, const HarnessConfig& cfg,
                           const SplitMix64& sampling_rng, const SplitMix64& bce_rng,
                           MemAccountant& acct) {
  const CceConfig tcfg = tile_config(cfg);
  BatchResult out;
  switch (cfg.backend) {
    case Backend::kCe: {
      LossOutput fwd = ce_full_forward(enc.e, params.c, enc.targets, &acct);
      out.loss = fwd.loss;
      out.grads = ce_full_backward(enc.e, params.c, enc.targets, 1.0, &acct);
      break;
    }
    case Backend::kCce: {
      LossOutput fwd = cce_forward(enc.e, params.c, enc.targets, tcfg, &acct);
      out.loss = fwd.loss;
      CceBackwardResult bwd =
          cce_backward(enc.e, params.c, enc.targets, fwd.lse, 1.0, tcfg, &acct);
      out.grads = std::move(bwd.grads);
      out.skipped_fraction = bwd.skipped_fraction;
      break;
    }
    case Backend::kCem:
    case Backend::kCcem: {
      SamplerConfig scfg;
      scfg.popularity_exponent = cfg.popularity_exponent;
      const NegIndexMatrix inds =
          cfg.sampler == NegSampler::kUniform
              ? sample_uniform(enc.targets, cfg.ns, params.catalog(), sampling_rng, scfg)
              : sample_popularity(enc.targets, cfg.ns, pop, sampling_rng, scfg);
      if (cfg.backend == Backend::kCem) {
        LossOutput fwd = ce_sampled_forward(enc.e, params.c, inds, &acct);
        out.loss = fwd.loss;
        out.grads = ce_sampled_backward(enc.e, params.c, inds, 1.0, &acct);
      } else {
        LossOutput fwd = ccem_forward(enc.e, params.c, inds, tcfg, &acct);
        out.loss = fwd.loss;
        out.grads = ccem_backward(enc.e, params.c, inds, fwd.lse, 1.0, tcfg, &acct);
      }
      break;
    }
    case Backend::kBce: {
      const std::vector<std::int64_t> neg =
          sample_bce_negatives(enc.targets, params.catalog(), bce_rng);
      BceResult res = bce_forward_backward(enc.e, params.c, enc.targets, neg, &acct);
      out.loss = res.loss;
      out.grads = std::move(res.grads);
      break;
    }
  }
  return out;
}

EvalSummary validation_summary(const ToyEncoderParams& params, const SplitSpec& split,
                               const PopularityTable& pop, const HarnessConfig& cfg) {
  if (split.valid.empty()) return EvalSummary{};
  return evaluate(params, split.valid, cfg.eval_k, pop.counts, cfg.workers);
}

}  // namespace

void validate_harness_config(const HarnessConfig& cfg) {
  if (cfg.batch_size == 0) throw std::invalid_argument("config: batch_size must be >= 1");
  if (cfg.max_seq_len < 2) throw std::invalid_argument("config: max_seq_len must be >= 2");
  if (cfg.hidden == 0) throw std::invalid_argument("config: hidden must be >= 1");
  if (cfg.eval_k == 0) throw std::invalid_argument("config: eval_k must be >= 1");
  if (cfg.row_block == 0 || cfg.col_block == 0) {
    throw std::invalid_argument("config: row_block and col_block must be >= 1");
  }
  if (backend_is_sampled(cfg.backend)) {
    if (cfg.ns == 0) {
      throw std::invalid_argument("config: backend " + std::string(to_string(cfg.backend)) +
                                  " requires ns >= 1");
    }
  } else if (cfg.ns != 0) {
    throw std::invalid_argument("config: ns applies only to the sampled backends (cem, ccem); " +
                                std::string(to_string(cfg.backend)) +
                                " scores a fixed candidate set");
  }
  if (cfg.filter_eps != 0.0 && cfg.backend != Backend::kCce) {
    throw std::invalid_argument("config: filter_eps applies only to the cce backend");
  }
  if (cfg.filter_eps < 0.0) throw std::invalid_argument("config: filter_eps must be >= 0");
  if (cfg.popularity_exponent < 0.0) {
    throw std::invalid_argument("config: popularity_exponent must be >= 0");
  }
}

std::vector<std::vector<std::int64_t>> make_training_windows(std::span<const Sequence> train,
                                                             std::size_t max_len) {
  if (max_len < 2) throw std::invalid_argument("windows: max_len must be >= 2");
  std::vector<std::vector<std::int64_t>> windows;
  for (const Sequence& seq : train) {
    for (std::size_t start = 0; start < seq.items.size(); start += max_len) {
      const std::size_t len = std::min(max_len, seq.items.size() - start);
      if (len < 2) break;  // a trailing single item predicts nothing
      windows.emplace_back(seq.items.begin() + static_cast<std::ptrdiff_t>(start),
                           seq.items.begin() + static_cast<std::ptrdiff_t>(start + len));
    }
  }
  return windows;
}

EpochReport train_epoch(ToyEncoderParams& params, AdamState& adam, const SplitSpec& split,
                        const PopularityTable& pop, const HarnessConfig& cfg, std::size_t epoch) {
  validate_harness_config(cfg);
  const std::size_t catalog = params.catalog();
  if (pop.counts.size() != catalog) {
    throw std::invalid_argument("train: popularity table size does not match the catalog");
  }

  const std::vector<std::vector<std::int64_t>> windows =
      make_training_windows(split.train, cfg.max_seq_len);
  if (windows.empty()) {
    throw std::invalid_argument("train: no training windows (every sequence shorter than 2)");
  }

  // Stream layout: a root generator per run, one namespace per epoch, and
  // within the epoch separate substreams for shuffling, candidate sampling
  // (per batch), and bce negatives (per batch). Work scheduling never touches
  // a stream, so results are identical for any worker count.
  const SplitMix64 root(cfg.seed);
  const SplitMix64 epoch_base = root.derived(1 + static_cast<std::uint64_t>(epoch));
  SplitMix64 shuffle_rng = epoch_base.derived(0);
  const SplitMix64 sampling_base = epoch_base.derived(1);
  const SplitMix64 bce_base = epoch_base.derived(2);

  std::vector<std::size_t> order(windows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = order.size(); i-- > 1;) {
    const std::uint64_t j = shuffle_rng.bounded(static_cast<std::uint64_t>(i) + 1);
    std::swap(order[i], order[static_cast<std::size_t>(j)]);
  }

  EpochReport report;
  report.epoch = epoch;
  report.backend = cfg.backend;

  double loss_weighted = 0.0;
  double skipped_weighted = 0.0;
  std::size_t rows_total = 0;

  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n_batches = (windows.size() + cfg.batch_size - 1) / cfg.batch_size;
  for (std::size_t bi = 0; bi < n_batches; ++bi) {
    const std::size_t lo = bi * cfg.batch_size;
    const std::size_t hi = std::min(lo + cfg.batch_size, windows.size());
    std::vector<std::vector<std::int64_t>> batch_windows;
    batch_windows.reserve(hi - lo);
    for (std::size_t i = lo; i < hi; ++i) batch_windows.push_back(windows[order[i]]);

    const EncodedBatch enc = encode_batch(params, batch_windows);
    const std::size_t n_rows = enc.e.rows();

    MemAccountant acct;
    BatchResult res = run_loss_layer(params, enc, pop, cfg,
                                     sampling_base.derived(static_cast<std::uint64_t>(bi)),
                                     bce_base.derived(static_cast<std::uint64_t>(bi)), acct);
    acct.expect_scratch_released();
    const MemAccountant::Report mem = acct.report();
    report.retained_bytes = std::max(report.retained_bytes, mem.retained_bytes(4));
    report.scratch_bytes = std::max(report.scratch_bytes, mem.scratch_bytes(4));

    EncoderGrads grads(catalog, cfg.hidden);
    encoder_backward(params, batch_windows, enc, res.grads.d_embeddings, grads);
    double* dc = grads.d_classifier.data().data();
    const double* lc = res.grads.d_classifier.data().data();
    for (std::size_t i = 0; i < grads.d_classifier.size(); ++i) dc[i] += lc[i];
    adam.step(params, grads);

    loss_weighted += res.loss * static_cast<double>(n_rows);
    skipped_weighted += res.skipped_fraction * static_cast<double>(n_rows);
    rows_total += n_rows;
  }
  const auto t1 = std::chrono::steady_clock::now();
  report.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

  report.loss = loss_weighted / static_cast<double>(rows_total);
  report.skipped_fraction = skipped_weighted / static_cast<double>(rows_total);

  const EvalSummary vs = validation_summary(params, split, pop, cfg);
  report.ndcg10 = vs.ndcg;
  report.coverage10 = vs.coverage;
  report.surprisal10 = vs.surprisal;
  return report;
}

TrainOutcome run_training(const SplitSpec& split, const PopularityTable& pop,
                          const HarnessConfig& cfg, std::size_t n_epochs) {
  validate_harness_config(cfg);
  const std::size_t catalog = pop.counts.size();
  if (catalog == 0) throw std::invalid_argument("train: empty popularity table");

  const SplitMix64 root(cfg.seed);
  TrainOutcome out;
  out.params = ToyEncoderParams::Init(catalog, cfg.hidden, root.derived(0));
  AdamState adam(catalog, cfg.hidden, cfg.adam);

  out.epochs.reserve(n_epochs);
  for (std::size_t e = 0; e < n_epochs; ++e) {
    out.epochs.push_back(train_epoch(out.params, adam, split, pop, cfg, e));
  }
  if (!split.test.empty()) {
    out.test_metrics = evaluate(out.params, split.test, cfg.eval_k, pop.counts, cfg.workers);
    out.has_test_metrics = true;
  }
  return out;
}

GradHistogram classifier_gradient_histogram(const ToyEncoderParams& params, const SplitSpec& split,
                                            const HarnessConfig& cfg, double upstream) {
  const std::vector<std::vector<std::int64_t>> windows =
      make_training_windows(split.train, cfg.max_seq_len);
  if (windows.empty()) {
    throw std::invalid_argument("gradhist: no training windows");
  }
  const std::size_t take = std::min(cfg.batch_size, windows.size());
  const std::span<const std::vector<std::int64_t>> batch(windows.data(), take);

  const EncodedBatch enc = encode_batch(params, batch);
  const GradPair g = ce_full_backward(enc.e, params.c, enc.targets, upstream);

  GradHistogram hist;
  hist.total_entries = g.d_classifier.size();
  std::array<std::size_t, 6> counts{};
  std::size_t tiny = 0;
  const double* data = g.d_classifier.data().data();
  for (std::size_t i = 0; i < hist.total_entries; ++i) {
    const double a = std::fabs(data[i]);
    std::size_t bin = hist.edges.size();
    for (std::size_t b = 0; b < hist.edges.size(); ++b) {
      if (a < hist.edges[b]) {
        bin = b;
        break;
      }
    }
    ++counts[bin];
    if (a < kFp16MinPositive) ++tiny;
  }
  const double denom = static_cast<double>(hist.total_entries);
  for (std::size_t b = 0; b < counts.size(); ++b) {
    hist.fractions[b] = static_cast<double>(counts[b]) / denom;
  }
  hist.below_fp16_min = static_cast<double>(tiny) / denom;
  return hist;
}

}  // namespace lseforge
