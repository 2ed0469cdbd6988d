#include "lseforge/sweep.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

#include "lseforge/stats.hpp"
#include "lseforge/threads.hpp"

namespace lseforge {

namespace {

std::vector<std::size_t> size_list(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array() || j.at(key).empty()) {
    throw std::invalid_argument(std::string("sweep grid: \"") + key +
                                "\" must be a non-empty array");
  }
  std::vector<std::size_t> out;
  for (const auto& v : j.at(key)) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      throw std::invalid_argument(std::string("sweep grid: \"") + key +
                                  "\" entries must be non-negative integers");
    }
    out.push_back(v.get<std::size_t>());
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  return f;
}

}  // namespace

SweepGrid parse_sweep_grid(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("sweep grid: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("sweep grid: top level must be an object");

  SweepGrid grid;
  grid.bs = size_list(j, "bs");
  grid.sl = size_list(j, "sl");
  grid.ns = size_list(j, "ns");
  if (!j.contains("backends") || !j.at("backends").is_array() || j.at("backends").empty()) {
    throw std::invalid_argument("sweep grid: \"backends\" must be a non-empty array");
  }
  for (const auto& v : j.at("backends")) {
    if (!v.is_string()) throw std::invalid_argument("sweep grid: backend names must be strings");
    grid.backends.push_back(backend_from_string(v.get<std::string>()));
  }
  return grid;
}

std::vector<SweepRecord> run_sweep(const SplitSpec& split, const PopularityTable& pop,
                                   const HarnessConfig& base, const SweepGrid& grid,
                                   std::size_t n_epochs, int jobs) {
  struct Point {
    std::size_t bs, sl, ns;
    Backend backend;
  };
  std::vector<Point> points;
  for (Backend b : grid.backends) {
    for (std::size_t bs : grid.bs) {
      for (std::size_t sl : grid.sl) {
        for (std::size_t ns : grid.ns) {
          points.push_back({bs, sl, ns, b});
        }
      }
    }
  }

  const SplitMix64 seed_root(base.seed);
  std::vector<SweepRecord> records(points.size());
  parallel_blocks(points.size(), jobs <= 0 ? 1 : jobs, [&](std::size_t, std::size_t i) {
    const Point& p = points[i];
    SweepRecord& rec = records[i];
    rec.bs = p.bs;
    rec.sl = p.sl;
    rec.ns = p.ns;
    rec.backend = p.backend;
    rec.seed = seed_root.derived(static_cast<std::uint64_t>(i)).seed();
    try {
      HarnessConfig cfg = base;
      cfg.backend = p.backend;
      cfg.batch_size = p.bs;
      cfg.max_seq_len = p.sl;
      cfg.ns = p.ns;
      cfg.seed = rec.seed;
      if (cfg.backend != Backend::kCce) cfg.filter_eps = 0.0;
      const TrainOutcome out = run_training(split, pop, cfg, n_epochs);
      if (!out.epochs.empty()) {
        const EpochReport& last = out.epochs.back();
        rec.ndcg10 = last.ndcg10;
        rec.coverage10 = last.coverage10;
        rec.surprisal10 = last.surprisal10;
        for (const EpochReport& ep : out.epochs) {
          rec.retained_bytes = std::max(rec.retained_bytes, ep.retained_bytes);
          rec.wall_ms += ep.wall_ms;
        }
      }
      rec.ok = true;
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.error = e.what();
    }
  });
  return records;
}

std::vector<AxisCorrelation> sweep_correlations(std::span<const SweepRecord> records) {
  std::vector<double> ndcg;
  std::vector<double> bs, sl, ns;
  for (const SweepRecord& r : records) {
    if (!r.ok) continue;
    ndcg.push_back(r.ndcg10);
    bs.push_back(static_cast<double>(r.bs));
    sl.push_back(static_cast<double>(r.sl));
    ns.push_back(static_cast<double>(r.ns));
  }
  const std::size_t n = ndcg.size();

  auto product = [&](const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
    return out;
  };

  std::vector<AxisCorrelation> rows;
  auto add = [&](const std::string& name, const std::vector<double>& axis) {
    AxisCorrelation row;
    row.axis = name;
    row.n = n;
    row.rho = n >= 2 ? spearman(axis, ndcg) : std::nan("");
    rows.push_back(std::move(row));
  };
  add("bs", bs);
  add("sl", sl);
  add("ns", ns);
  add("bs*ns", product(bs, ns));
  add("sl*bs", product(sl, bs));
  add("ns*sl", product(ns, sl));
  return rows;
}

void write_sweep_csv(std::span<const SweepRecord> records, const std::string& path) {
  std::ofstream f = open_out(path);
  f << "bs,sl,ns,backend,ndcg10,coverage10,surprisal10,retained_bytes,wall_ms,seed,ok,error\n";
  for (const SweepRecord& r : records) {
    f << r.bs << ',' << r.sl << ',' << r.ns << ',' << to_string(r.backend) << ','
      << format_double(r.ndcg10) << ',' << format_double(r.coverage10) << ','
      << format_double(r.surprisal10) << ',' << r.retained_bytes << ','
      << format_double(r.wall_ms) << ',' << r.seed << ',' << (r.ok ? "true" : "false") << ','
      << csv_escape(r.error) << '\n';
  }
}

void write_correlation_csv(std::span<const AxisCorrelation> rows, const std::string& path) {
  std::ofstream f = open_out(path);
  f << "axis,spearman_rho,n_runs\n";
  for (const AxisCorrelation& row : rows) {
    f << csv_escape(row.axis) << ',';
    if (!std::isnan(row.rho)) f << format_double(row.rho);
    f << ',' << row.n << '\n';
  }
}

}  // namespace lseforge
