#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lseforge/rng.hpp"

namespace lseforge {

struct Interaction {
  std::int64_t user = 0;  // dense user index
  std::int64_t item = 0;  // dense item index
  std::int64_t ts = 0;
};

// A user/item interaction history with both id spaces densely re-indexed.
// events are sorted by (user, ts), stably, so a user's history reads off as
// one contiguous, time-ordered slice.
struct InteractionLog {
  std::vector<Interaction> events;
  std::size_t n_users = 0;
  std::size_t n_items = 0;
  std::vector<std::int64_t> user_vocab;  // dense user index -> original id
  std::vector<std::int64_t> item_vocab;  // dense item index -> original id
};

// Reads a CSV with header user_id,item_id,timestamp (integer fields). Users
// with fewer than 2 events are dropped; duplicates are kept as distinct
// events. Errors carry the file path and 1-based line number.
InteractionLog ingest_csv(const std::string& path);

// Writes the item re-indexing map as CSV item_id,dense_index.
void write_vocab_csv(const InteractionLog& log, const std::string& path);

// Synthetic corpus with learnable next-item structure: the catalog is split
// into equal clusters, each user walks inside one home cluster with
// probability 0.9 (jumping uniformly anywhere otherwise), and within-cluster
// popularity follows Zipf(1.0). Timestamps interleave users round-robin so a
// global time cutoff slices every user's tail.
InteractionLog make_synthetic(std::size_t catalog, std::size_t n_users,
                              std::size_t events_per_user, std::size_t n_clusters,
                              const SplitMix64& rng);

}  // namespace lseforge
