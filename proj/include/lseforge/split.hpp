#pragma once

#include <cstdint>
#include <vector>

#include "lseforge/interactions.hpp"
#include "lseforge/rng.hpp"
#include "lseforge/sampler.hpp"

namespace lseforge {

// One user's training slice: items with their timestamps, time-ordered.
struct Sequence {
  std::int64_t user = 0;
  std::vector<std::int64_t> items;
  std::vector<std::int64_t> ts;
};

// One held-out evaluation case: rank `target` given everything before it.
struct EvalPair {
  std::int64_t user = 0;
  std::vector<std::int64_t> prefix;
  std::int64_t target = 0;
  std::int64_t target_ts = 0;
};

struct SplitSpec {
  std::vector<Sequence> train;
  std::vector<EvalPair> valid;
  std::vector<EvalPair> test;
  std::int64_t cutoff_ts = 0;
};

// Global temporal protocol. The cutoff is the nearest-rank `quantile` of all
// event timestamps (events at the cutoff count as pre-cutoff). Validation
// draws a seeded `val_user_frac` sample (floor of the pool size) of users
// with pre-cutoff history; each sampled user with at least 2 pre-cutoff
// events contributes (prefix = pre-cutoff minus last, target = last
// pre-cutoff event), and that target is withheld from training. Test pairs
// take each user's last post-cutoff event as target with every earlier event
// as prefix; users without post-cutoff events, or with nothing before the
// target, are absent.
SplitSpec temporal_split(const InteractionLog& log, double quantile, double val_user_frac,
                         const SplitMix64& rng);

// Interaction counts per item over the training sequences only.
PopularityTable popularity_from_training(const SplitSpec& split, std::size_t catalog);

// Throws std::logic_error if any test or validation target event
// (user, item, ts) also appears in a training sequence. Meaningful for logs
// without duplicate (user, item, ts) triples.
void assert_no_leakage(const SplitSpec& split);

}  // namespace lseforge
