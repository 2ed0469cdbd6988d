#include "lseforge/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lseforge {

namespace {

void validate_positives(std::span<const std::int64_t> positives, std::size_t catalog) {
  for (std::size_t i = 0; i < positives.size(); ++i) {
    if (positives[i] < 0 || static_cast<std::size_t>(positives[i]) >= catalog) {
      throw std::invalid_argument("sampler: row " + std::to_string(i) + " positive " +
                                  std::to_string(positives[i]) + " outside catalog of " +
                                  std::to_string(catalog));
    }
  }
}

[[noreturn]] void retry_cap_error(std::size_t row, int cap) {
  throw std::runtime_error("sampler: row " + std::to_string(row) + " exhausted " +
                           std::to_string(cap) +
                           " rejection retries; the distribution leaves no valid negative");
}

}  // namespace

PopularityTable PopularityTable::FromCounts(std::vector<std::int64_t> counts) {
  PopularityTable t;
  t.total = 0;
  for (std::size_t v = 0; v < counts.size(); ++v) {
    if (counts[v] < 0) {
      throw std::invalid_argument("PopularityTable: item " + std::to_string(v) +
                                  " has negative count " + std::to_string(counts[v]));
    }
    t.total += counts[v];
  }
  t.counts = std::move(counts);
  return t;
}

NegIndexMatrix sample_uniform(std::span<const std::int64_t> positives, std::size_t ns,
                              std::size_t catalog, const SplitMix64& rng,
                              const SamplerConfig& cfg) {
  if (catalog == 0) {
    throw std::invalid_argument("sample_uniform: empty catalog");
  }
  validate_positives(positives, catalog);
  if (ns > catalog - 1) {
    throw std::invalid_argument("sample_uniform: ns = " + std::to_string(ns) +
                                " exceeds catalog minus positive (" +
                                std::to_string(catalog - 1) + ")");
  }

  NegIndexMatrix inds(positives.size(), 1 + ns);
  for (std::size_t i = 0; i < positives.size(); ++i) {
    inds(i, 0) = positives[i];
    SplitMix64 row_rng = rng.derived(i);
    for (std::size_t s = 1; s <= ns; ++s) {
      bool placed = false;
      for (int attempt = 0; attempt < cfg.retry_cap; ++attempt) {
        const auto v = static_cast<std::int64_t>(row_rng.bounded(catalog));
        if (v != positives[i]) {
          inds(i, s) = v;
          placed = true;
          break;
        }
      }
      if (!placed) retry_cap_error(i, cfg.retry_cap);
    }
  }
  return inds;
}

NegIndexMatrix sample_popularity(std::span<const std::int64_t> positives, std::size_t ns,
                                 const PopularityTable& pop, const SplitMix64& rng,
                                 const SamplerConfig& cfg) {
  const std::size_t catalog = pop.counts.size();
  if (catalog == 0) {
    throw std::invalid_argument("sample_popularity: empty popularity table");
  }
  validate_positives(positives, catalog);
  if (ns > catalog - 1) {
    throw std::invalid_argument("sample_popularity: ns = " + std::to_string(ns) +
                                " exceeds catalog minus positive (" +
                                std::to_string(catalog - 1) + ")");
  }

  // Inverse-CDF over cumulative weights; zero-weight items occupy an empty
  // interval and are never drawn.
  std::vector<double> cumulative(catalog);
  double running = 0.0;
  for (std::size_t v = 0; v < catalog; ++v) {
    const auto count = static_cast<double>(pop.counts[v]);
    running += cfg.popularity_exponent == 1.0 ? count : std::pow(count, cfg.popularity_exponent);
    cumulative[v] = running;
  }
  if (!(running > 0.0)) {
    throw std::invalid_argument("sample_popularity: all item weights are zero");
  }

  NegIndexMatrix inds(positives.size(), 1 + ns);
  for (std::size_t i = 0; i < positives.size(); ++i) {
    inds(i, 0) = positives[i];
    SplitMix64 row_rng = rng.derived(i);
    for (std::size_t s = 1; s <= ns; ++s) {
      bool placed = false;
      for (int attempt = 0; attempt < cfg.retry_cap; ++attempt) {
        const double u = row_rng.uniform() * running;
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        // u can round up to the total weight; redraw rather than index past
        // the table.
        if (it == cumulative.end()) continue;
        const auto v = static_cast<std::int64_t>(it - cumulative.begin());
        if (v != positives[i]) {
          inds(i, s) = v;
          placed = true;
          break;
        }
      }
      if (!placed) retry_cap_error(i, cfg.retry_cap);
    }
  }
  return inds;
}

}  // namespace lseforge
