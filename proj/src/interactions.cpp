#include "lseforge/interactions.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <stdexcept>

namespace lseforge {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::int64_t parse_int_field(const std::string& field, const std::string& path,
                             std::size_t line_no, const char* what) {
  const std::string t = trim(field);
  if (t.empty()) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": empty " + what + " field");
  }
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (errno != 0 || end != t.c_str() + t.size()) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + what + " '" + t +
                             "' is not an integer");
  }
  return v;
}

struct RawEvent {
  std::int64_t user;
  std::int64_t item;
  std::int64_t ts;
};

}  // namespace

InteractionLog ingest_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open interaction file '" + path + "'");
  }

  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error(path + ": empty file (expected header user_id,item_id,timestamp)");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (trim(line) != "user_id,item_id,timestamp") {
    throw std::runtime_error(path + ":1: expected header 'user_id,item_id,timestamp', got '" +
                             trim(line) + "'");
  }

  std::vector<RawEvent> raw;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const std::size_t c1 = line.find(',');
    const std::size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos ||
        line.find(',', c2 + 1) != std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected 3 comma-separated fields, got '" + line + "'");
    }
    raw.push_back({parse_int_field(line.substr(0, c1), path, line_no, "user_id"),
                   parse_int_field(line.substr(c1 + 1, c2 - c1 - 1), path, line_no, "item_id"),
                   parse_int_field(line.substr(c2 + 1), path, line_no, "timestamp")});
  }
  if (raw.empty()) {
    throw std::runtime_error(path + ": no interaction rows after the header");
  }

  std::map<std::int64_t, std::size_t> user_counts;
  for (const RawEvent& e : raw) ++user_counts[e.user];

  std::map<std::int64_t, std::int64_t> user_index;
  for (const auto& [user, count] : user_counts) {
    if (count >= 2) {
      const auto next = static_cast<std::int64_t>(user_index.size());
      user_index.emplace(user, next);
    }
  }
  if (user_index.empty()) {
    throw std::runtime_error(path + ": every user has fewer than 2 events; nothing to model");
  }

  std::map<std::int64_t, std::int64_t> item_index;
  for (const RawEvent& e : raw) {
    if (user_index.count(e.user)) item_index.emplace(e.item, 0);
  }
  {
    std::int64_t next = 0;
    for (auto& [item, dense] : item_index) dense = next++;
  }

  InteractionLog log;
  log.n_users = user_index.size();
  log.n_items = item_index.size();
  log.user_vocab.resize(log.n_users);
  for (const auto& [user, dense] : user_index) log.user_vocab[static_cast<std::size_t>(dense)] = user;
  log.item_vocab.resize(log.n_items);
  for (const auto& [item, dense] : item_index) log.item_vocab[static_cast<std::size_t>(dense)] = item;

  log.events.reserve(raw.size());
  for (const RawEvent& e : raw) {
    const auto uit = user_index.find(e.user);
    if (uit == user_index.end()) continue;
    log.events.push_back({uit->second, item_index.at(e.item), e.ts});
  }
  std::stable_sort(log.events.begin(), log.events.end(), [](const Interaction& a, const Interaction& b) {
    if (a.user != b.user) return a.user < b.user;
    return a.ts < b.ts;
  });
  return log;
}

void write_vocab_csv(const InteractionLog& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write vocabulary file '" + path + "'");
  }
  out << "item_id,dense_index\n";
  for (std::size_t dense = 0; dense < log.item_vocab.size(); ++dense) {
    out << log.item_vocab[dense] << "," << dense << "\n";
  }
  if (!out) {
    throw std::runtime_error("failed writing vocabulary file '" + path + "'");
  }
}

InteractionLog make_synthetic(std::size_t catalog, std::size_t n_users,
                              std::size_t events_per_user, std::size_t n_clusters,
                              const SplitMix64& rng) {
  if (catalog < 1 || n_users < 1 || events_per_user < 1) {
    throw std::invalid_argument("make_synthetic: catalog, n_users, events_per_user must be >= 1");
  }
  if (n_clusters < 1 || n_clusters > catalog) {
    throw std::invalid_argument("make_synthetic: n_clusters must be in [1, catalog]");
  }

  // Per-cluster cumulative Zipf(1.0) weights: rank r inside a cluster has
  // weight 1/r.
  std::vector<std::size_t> cluster_lo(n_clusters + 1);
  for (std::size_t c = 0; c <= n_clusters; ++c) cluster_lo[c] = catalog * c / n_clusters;
  std::vector<std::vector<double>> zipf_cum(n_clusters);
  for (std::size_t c = 0; c < n_clusters; ++c) {
    const std::size_t size = cluster_lo[c + 1] - cluster_lo[c];
    zipf_cum[c].resize(size);
    double run = 0.0;
    for (std::size_t r = 0; r < size; ++r) {
      run += 1.0 / static_cast<double>(r + 1);
      zipf_cum[c][r] = run;
    }
  }

  InteractionLog log;
  log.n_users = n_users;
  log.n_items = catalog;
  log.user_vocab.resize(n_users);
  log.item_vocab.resize(catalog);
  for (std::size_t u = 0; u < n_users; ++u) log.user_vocab[u] = static_cast<std::int64_t>(u);
  for (std::size_t v = 0; v < catalog; ++v) log.item_vocab[v] = static_cast<std::int64_t>(v);

  log.events.reserve(n_users * events_per_user);
  for (std::size_t u = 0; u < n_users; ++u) {
    SplitMix64 stream = rng.derived(u);
    const std::size_t home = stream.bounded(n_clusters);
    const auto& cum = zipf_cum[home];
    for (std::size_t t = 0; t < events_per_user; ++t) {
      std::int64_t item;
      if (!cum.empty() && stream.uniform() >= 0.1) {
        const double u01 = stream.uniform() * cum.back();
        const auto it = std::upper_bound(cum.begin(), cum.end(), u01);
        const std::size_t rank =
            it == cum.end() ? cum.size() - 1 : static_cast<std::size_t>(it - cum.begin());
        item = static_cast<std::int64_t>(cluster_lo[home] + rank);
      } else {
        item = static_cast<std::int64_t>(stream.bounded(catalog));
      }
      // Round-robin timestamps: a global cutoff slices every user's tail.
      log.events.push_back({static_cast<std::int64_t>(u), item,
                            static_cast<std::int64_t>(t * n_users + u)});
    }
  }
  return log;
}

}  // namespace lseforge
