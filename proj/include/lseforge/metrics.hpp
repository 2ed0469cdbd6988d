#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lseforge/encoder.hpp"
#include "lseforge/split.hpp"

namespace lseforge {

struct EvalSummary {
  double ndcg = 0.0;       // mean over eval pairs of 1/log2(rank+1), 0 past k
  double coverage = 0.0;   // |union of all top-k lists| / catalog
  double surprisal = 0.0;  // mean normalized self-information of recommended items
};

// Scores every eval pair with the encoder + classifier and aggregates ranking
// quality at depth k (clamped to the catalog).
//
// Rank of the target = 1 + #{scores strictly above} + #{tied items with a
// smaller id}, i.e. ties break in ascending item id. Top-k lists use the same
// order (score descending, id ascending).
//
// Surprisal of an item with training count c out of `total` training events is
// −log2(max(c,1)/total)/log2(total) ∈ [0,1]; per user the top-k surprisals are
// averaged, then averaged across users. Requires total ≥ 2.
EvalSummary evaluate(const ToyEncoderParams& params, std::span<const EvalPair> pairs,
                     std::size_t k, const std::vector<std::int64_t>& popularity_counts,
                     int workers = 0);

}  // namespace lseforge
