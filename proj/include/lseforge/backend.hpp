#pragma once

#include <string>
#include <string_view>

namespace lseforge {

// Loss backends. The "m" suffix marks the negative-sampled ("minus")
// variants that score only per-row candidate sets instead of the catalog.
enum class Backend {
  kCe,    // full-catalog cross-entropy, logits materialized
  kCem,   // sampled cross-entropy, candidate logits materialized
  kCce,   // full-catalog cross-entropy, blockwise fused (logits recomputed)
  kCcem,  // sampled cross-entropy, fused over candidate sets
  kBce,   // binary cross-entropy, one positive vs one sampled negative
};

std::string_view to_string(Backend b);
Backend backend_from_string(std::string_view name);

// True for backends that consume per-row sampled candidate sets.
inline bool backend_is_sampled(Backend b) { return b == Backend::kCem || b == Backend::kCcem; }

}  // namespace lseforge
