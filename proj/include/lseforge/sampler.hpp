#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lseforge/neg_index.hpp"
#include "lseforge/rng.hpp"

namespace lseforge {

// Per-item interaction counts backing popularity-weighted sampling and the
// surprisal metric.
struct PopularityTable {
  std::vector<std::int64_t> counts;
  std::int64_t total = 0;

  static PopularityTable FromCounts(std::vector<std::int64_t> counts);
};

struct SamplerConfig {
  double popularity_exponent = 1.0;  // weight = count^exponent
  int retry_cap = 100;               // rejection retries per slot before failing
};

// Fills slots 1..ns of each row with items drawn uniformly over the catalog,
// with replacement across slots, rejecting the row's own positive. Slot 0 is
// the positive. Each row draws from rng.derived(row), so the output does not
// depend on evaluation order.
NegIndexMatrix sample_uniform(std::span<const std::int64_t> positives, std::size_t ns,
                              std::size_t catalog, const SplitMix64& rng,
                              const SamplerConfig& cfg = {});

// Same contract with draws proportional to counts[v]^exponent (inverse-CDF
// over the cumulative weights; zero-weight items are never drawn).
NegIndexMatrix sample_popularity(std::span<const std::int64_t> positives, std::size_t ns,
                                 const PopularityTable& pop, const SplitMix64& rng,
                                 const SamplerConfig& cfg = {});

}  // namespace lseforge
