#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lseforge/backend.hpp"
#include "lseforge/trainer.hpp"

namespace lseforge {

// Cartesian grid over batch size, window length, negative count and backend.
// Parsed from a JSON object {"bs": [...], "sl": [...], "ns": [...],
// "backends": ["cce", ...]}; every key must be present and non-empty.
struct SweepGrid {
  std::vector<std::size_t> bs;
  std::vector<std::size_t> sl;
  std::vector<std::size_t> ns;
  std::vector<Backend> backends;
};

SweepGrid parse_sweep_grid(const std::string& json_text);

// One grid point's outcome. Metrics are the final epoch's validation scores
// (zeros when the split has no validation pairs); retained_bytes is the
// worst epoch's loss-layer retained peak; wall_ms sums the epochs'
// optimization passes. A run that throws is recorded with ok = false and the
// error message, and the sweep continues.
struct SweepRecord {
  std::size_t bs = 0;
  std::size_t sl = 0;
  std::size_t ns = 0;
  Backend backend = Backend::kCce;
  double ndcg10 = 0.0;
  double coverage10 = 0.0;
  double surprisal10 = 0.0;
  std::uint64_t retained_bytes = 0;
  double wall_ms = 0.0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
};

// Runs every grid point (iteration order: backends, then bs, then sl, then
// ns; run i trains with seed derived(i) of the base seed) for n_epochs.
// `jobs` grid points run concurrently; records are ordered by run index
// either way.
std::vector<SweepRecord> run_sweep(const SplitSpec& split, const PopularityTable& pop,
                                   const HarnessConfig& base, const SweepGrid& grid,
                                   std::size_t n_epochs, int jobs = 1);

// Rank correlation between configuration axes (and pairwise products) and
// final ndcg across the successful runs. rho is NaN when fewer than two runs
// succeeded or either side is constant.
struct AxisCorrelation {
  std::string axis;
  double rho = 0.0;
  std::size_t n = 0;
};

std::vector<AxisCorrelation> sweep_correlations(std::span<const SweepRecord> records);

// CSV serialization with fixed headers:
//   bs,sl,ns,backend,ndcg10,coverage10,surprisal10,retained_bytes,wall_ms,seed,ok,error
//   axis,spearman_rho,n_runs        (NaN rho prints as an empty field)
void write_sweep_csv(std::span<const SweepRecord> records, const std::string& path);
void write_correlation_csv(std::span<const AxisCorrelation> rows, const std::string& path);

}  // namespace lseforge
