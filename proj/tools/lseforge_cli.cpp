// Command-line front end for the loss library and training harness.
//
// Exit codes: 0 success, 1 runtime failure (bad data file contents, training
// errors), 2 usage errors (bad flags, inconsistent configuration, missing
// input files, invalid sweep grids).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "lseforge/backend.hpp"
#include "lseforge/interactions.hpp"
#include "lseforge/sampler.hpp"
#include "lseforge/split.hpp"
#include "lseforge/sweep.hpp"
#include "lseforge/trainer.hpp"

namespace {

using lseforge::Backend;
using lseforge::HarnessConfig;
using lseforge::PopularityTable;
using lseforge::SplitMix64;
using lseforge::SplitSpec;

// Substream namespaces of the root seed used by the CLI itself. Training
// reserves derived(0) and derived(1+epoch); these stay far away.
constexpr std::uint64_t kSplitStream = 1'000'000;
constexpr std::uint64_t kSynthStream = 1'000'001;

struct Options {
  // data source
  std::string data_path;
  bool synthetic = false;
  std::size_t catalog = 2000;
  std::size_t users = 2000;
  std::size_t events_per_user = 20;
  std::size_t clusters = 100;
  double quantile = 0.9;
  double val_frac = 0.05;

  // model / training
  std::string backend = "cce";
  std::size_t bs = 32;
  std::size_t sl = 20;
  std::size_t ns = 0;
  std::size_t hidden = 32;
  std::size_t epochs = 5;
  std::uint64_t seed = 0;
  double filter_eps = 0.0;
  std::string sampler = "uniform";
  double pop_exponent = 1.0;
  double lr = 1e-3;
  int workers = 0;
  std::size_t row_block = 128;
  std::size_t col_block = 256;

  // sweep
  std::string grid_path;
  std::string sweep_out = "sweep_records.csv";
  std::string corr_out = "sweep_spearman.csv";
  int jobs = 1;

  // filter-sweep
  std::vector<double> eps_list{0.0, 1e-8, 1e-6, 1e-4, 1e-2};
  std::string filter_out = "filter_sweep.csv";
};

void add_common_options(CLI::App* sub, Options& o) {
  sub->add_option("--data", o.data_path,
                  "Interaction CSV (user_id,item_id,timestamp); a <file>.vocab.csv sidecar with "
                  "the item re-indexing is written next to it");
  sub->add_flag("--synthetic", o.synthetic,
                "Generate a clustered synthetic corpus instead of reading --data (default when "
                "--data is absent)");
  sub->add_option("--catalog", o.catalog, "Synthetic catalog size")->capture_default_str();
  sub->add_option("--users", o.users, "Synthetic user count")->capture_default_str();
  sub->add_option("--events-per-user", o.events_per_user, "Synthetic events per user")
      ->capture_default_str();
  sub->add_option("--clusters", o.clusters, "Synthetic cluster count")->capture_default_str();
  sub->add_option("--quantile", o.quantile, "Temporal cutoff quantile of event timestamps")
      ->capture_default_str();
  sub->add_option("--val-frac", o.val_frac, "Fraction of eligible users held out for validation")
      ->capture_default_str();
  sub->add_option("--backend", o.backend, "Loss backend: ce, cem, cce, ccem, bce")
      ->capture_default_str();
  sub->add_option("--bs", o.bs, "Training windows per optimizer step")->capture_default_str();
  sub->add_option("--sl", o.sl, "Maximum window length")->capture_default_str();
  sub->add_option("--ns", o.ns, "Negatives per row (sampled backends only)")
      ->capture_default_str();
  sub->add_option("--hidden", o.hidden, "Hidden width of the encoder")->capture_default_str();
  sub->add_option("--epochs", o.epochs, "Training epochs")->capture_default_str();
  sub->add_option("--seed", o.seed, "Root seed; every random choice derives from it")
      ->capture_default_str();
  sub->add_option("--filter-eps", o.filter_eps,
                  "Gradient filtering threshold (cce only; 0 disables)")
      ->capture_default_str();
  sub->add_option("--sampler", o.sampler, "Negative sampler: uniform or popularity")
      ->capture_default_str();
  sub->add_option("--pop-exponent", o.pop_exponent, "Popularity sampling exponent")
      ->capture_default_str();
  sub->add_option("--lr", o.lr, "Adam learning rate")->capture_default_str();
  sub->add_option("--workers", o.workers,
                  "Worker threads for the fused kernels and evaluation (0 = LSEFORGE_THREADS "
                  "env, else 1)")
      ->capture_default_str();
  sub->add_option("--row-block", o.row_block, "Rows per tile in the fused kernels")
      ->capture_default_str();
  sub->add_option("--col-block", o.col_block, "Catalog columns per tile in the fused kernels")
      ->capture_default_str();
}

HarnessConfig harness_config(const Options& o) {
  HarnessConfig cfg;
  cfg.backend = lseforge::backend_from_string(o.backend);
  cfg.batch_size = o.bs;
  cfg.max_seq_len = o.sl;
  cfg.ns = o.ns;
  cfg.filter_eps = o.filter_eps;
  if (o.sampler == "uniform") {
    cfg.sampler = lseforge::NegSampler::kUniform;
  } else if (o.sampler == "popularity") {
    cfg.sampler = lseforge::NegSampler::kPopularity;
  } else {
    throw std::invalid_argument("--sampler must be uniform or popularity, got " + o.sampler);
  }
  cfg.popularity_exponent = o.pop_exponent;
  cfg.adam.lr = o.lr;
  cfg.hidden = o.hidden;
  cfg.seed = o.seed;
  cfg.workers = o.workers;
  cfg.row_block = o.row_block;
  cfg.col_block = o.col_block;
  return cfg;
}

// Flag/config checks that must fail before any data is touched.
void validate_usage(const Options& o, bool needs_grid) {
  if (!o.data_path.empty() && o.synthetic) {
    throw std::invalid_argument("--data and --synthetic are mutually exclusive");
  }
  if (!o.data_path.empty() && !std::filesystem::exists(o.data_path)) {
    throw std::invalid_argument("data file not found: " + o.data_path);
  }
  if (o.quantile <= 0.0 || o.quantile > 1.0) {
    throw std::invalid_argument("--quantile must lie in (0, 1]");
  }
  if (o.val_frac < 0.0 || o.val_frac > 1.0) {
    throw std::invalid_argument("--val-frac must lie in [0, 1]");
  }
  if (needs_grid && o.grid_path.empty()) {
    throw std::invalid_argument("sweep requires --grid <json file>");
  }
  if (needs_grid && !std::filesystem::exists(o.grid_path)) {
    throw std::invalid_argument("grid file not found: " + o.grid_path);
  }
  lseforge::validate_harness_config(harness_config(o));
}

struct LoadedData {
  SplitSpec split;
  PopularityTable pop;
};

LoadedData prepare_data(const Options& o) {
  lseforge::InteractionLog log;
  if (!o.data_path.empty()) {
    log = lseforge::ingest_csv(o.data_path);
    lseforge::write_vocab_csv(log, o.data_path + ".vocab.csv");
  } else {
    const SplitMix64 root(o.seed);
    log = lseforge::make_synthetic(o.catalog, o.users, o.events_per_user, o.clusters,
                                   root.derived(kSynthStream));
  }
  const SplitMix64 root(o.seed);
  SplitSpec split =
      lseforge::temporal_split(log, o.quantile, o.val_frac, root.derived(kSplitStream));
  PopularityTable pop = lseforge::popularity_from_training(split, log.n_items);
  return {std::move(split), std::move(pop)};
}

nlohmann::ordered_json epoch_json(const lseforge::EpochReport& ep) {
  nlohmann::ordered_json j;
  j["epoch"] = ep.epoch;
  j["backend"] = std::string(lseforge::to_string(ep.backend));
  j["loss"] = ep.loss;
  j["wall_ms"] = ep.wall_ms;
  j["retained_bytes"] = ep.retained_bytes;
  j["scratch_bytes"] = ep.scratch_bytes;
  j["ndcg10"] = ep.ndcg10;
  j["coverage10"] = ep.coverage10;
  j["surprisal10"] = ep.surprisal10;
  j["skipped_fraction"] = ep.skipped_fraction;
  return j;
}

int cmd_train(const Options& o) {
  const LoadedData data = prepare_data(o);
  const HarnessConfig cfg = harness_config(o);
  const lseforge::TrainOutcome out = lseforge::run_training(data.split, data.pop, cfg, o.epochs);
  for (const lseforge::EpochReport& ep : out.epochs) {
    std::cout << epoch_json(ep).dump() << '\n';
  }
  if (out.has_test_metrics) {
    nlohmann::ordered_json j;
    j["test_ndcg10"] = out.test_metrics.ndcg;
    j["test_coverage10"] = out.test_metrics.coverage;
    j["test_surprisal10"] = out.test_metrics.surprisal;
    std::cout << j.dump() << '\n';
  }
  return 0;
}

int cmd_gradhist(const Options& o) {
  const LoadedData data = prepare_data(o);
  const HarnessConfig cfg = harness_config(o);
  const lseforge::TrainOutcome out = lseforge::run_training(data.split, data.pop, cfg, o.epochs);
  const lseforge::GradHistogram hist =
      lseforge::classifier_gradient_histogram(out.params, data.split, cfg);
  nlohmann::ordered_json j;
  j["edges"] = hist.edges;
  j["fractions"] = hist.fractions;
  j["below_fp16_min"] = hist.below_fp16_min;
  j["total_entries"] = hist.total_entries;
  std::cout << j.dump() << '\n';
  return 0;
}

int cmd_sweep(const Options& o) {
  std::ifstream gf(o.grid_path);
  std::stringstream buf;
  buf << gf.rdbuf();
  const lseforge::SweepGrid grid = lseforge::parse_sweep_grid(buf.str());

  const LoadedData data = prepare_data(o);
  const HarnessConfig base = harness_config(o);
  const std::vector<lseforge::SweepRecord> records =
      lseforge::run_sweep(data.split, data.pop, base, grid, o.epochs, o.jobs);
  lseforge::write_sweep_csv(records, o.sweep_out);
  const std::vector<lseforge::AxisCorrelation> corr = lseforge::sweep_correlations(records);
  lseforge::write_correlation_csv(corr, o.corr_out);

  std::size_t ok = 0;
  for (const auto& r : records) ok += r.ok ? 1 : 0;
  std::cout << "sweep: " << ok << "/" << records.size() << " runs succeeded; records in "
            << o.sweep_out << ", correlations in " << o.corr_out << '\n';
  return 0;
}

int cmd_filter_sweep(const Options& o) {
  const LoadedData data = prepare_data(o);
  std::ofstream out(o.filter_out);
  if (!out) throw std::runtime_error("cannot open for writing: " + o.filter_out);
  const std::string header = "filter_eps,ndcg10,wall_ms,skipped_fraction";
  out << header << '\n';
  std::cout << header << '\n';
  for (double eps : o.eps_list) {
    HarnessConfig cfg = harness_config(o);
    cfg.filter_eps = eps;
    const lseforge::TrainOutcome res = lseforge::run_training(data.split, data.pop, cfg, o.epochs);
    double wall = 0.0;
    double skipped = 0.0;
    double ndcg = 0.0;
    if (!res.epochs.empty()) {
      for (const auto& ep : res.epochs) {
        wall += ep.wall_ms;
        skipped += ep.skipped_fraction;
      }
      skipped /= static_cast<double>(res.epochs.size());
      ndcg = res.epochs.back().ndcg10;
    }
    char line[160];
    std::snprintf(line, sizeof line, "%.10g,%.10g,%.10g,%.10g", eps, ndcg, wall, skipped);
    out << line << '\n';
    std::cout << line << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Memory-lean cross-entropy training harness for large-catalog recommenders"};
  app.require_subcommand(1);
  Options o;

  CLI::App* train = app.add_subcommand("train", "Train one configuration, one JSON line per epoch");
  add_common_options(train, o);

  CLI::App* gradhist = app.add_subcommand(
      "gradhist", "Train, then print the |d_classifier| magnitude histogram as JSON");
  add_common_options(gradhist, o);

  CLI::App* sweep = app.add_subcommand("sweep", "Run a config grid and write CSV records");
  add_common_options(sweep, o);
  sweep->add_option("--grid", o.grid_path, "JSON grid file: {\"bs\":[],\"sl\":[],\"ns\":[],\"backends\":[]}");
  sweep->add_option("--out", o.sweep_out, "Records CSV path")->capture_default_str();
  sweep->add_option("--corr-out", o.corr_out, "Axis correlation CSV path")->capture_default_str();
  sweep->add_option("--jobs", o.jobs, "Concurrent grid points")->capture_default_str();

  CLI::App* fsweep = app.add_subcommand(
      "filter-sweep", "Train the cce backend across gradient-filtering thresholds");
  add_common_options(fsweep, o);
  fsweep->add_option("--eps-list", o.eps_list, "Thresholds to sweep")->capture_default_str();
  fsweep->add_option("--out", o.filter_out, "Output CSV path")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const bool is_sweep = sweep->parsed();
  try {
    if (fsweep->parsed() && o.backend != "cce") {
      throw std::invalid_argument("filter-sweep only applies to --backend cce");
    }
    validate_usage(o, is_sweep);
    if (is_sweep) {
      // Grid contents are usage input: reject malformed grids before any work.
      std::ifstream gf(o.grid_path);
      std::stringstream buf;
      buf << gf.rdbuf();
      (void)lseforge::parse_sweep_grid(buf.str());
    }
  } catch (const std::exception& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (train->parsed()) return cmd_train(o);
    if (gradhist->parsed()) return cmd_gradhist(o);
    if (is_sweep) return cmd_sweep(o);
    if (fsweep->parsed()) return cmd_filter_sweep(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
