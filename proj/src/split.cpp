#include "lseforge/split.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>

namespace lseforge {

SplitSpec temporal_split(const InteractionLog& log, double quantile, double val_user_frac,
                         const SplitMix64& rng) {
  if (log.events.empty()) {
    throw std::invalid_argument("temporal_split: empty interaction log");
  }
  if (!(quantile > 0.0 && quantile <= 1.0)) {
    throw std::invalid_argument("temporal_split: quantile must be in (0, 1], got " +
                                std::to_string(quantile));
  }
  if (!(val_user_frac >= 0.0 && val_user_frac <= 1.0)) {
    throw std::invalid_argument("temporal_split: val_user_frac must be in [0, 1], got " +
                                std::to_string(val_user_frac));
  }

  // Nearest-rank quantile: the smallest timestamp with at least
  // ceil(quantile * T) events at or below it.
  std::vector<std::int64_t> stamps;
  stamps.reserve(log.events.size());
  for (const Interaction& e : log.events) stamps.push_back(e.ts);
  std::sort(stamps.begin(), stamps.end());
  if (stamps.front() == stamps.back()) {
    throw std::invalid_argument("temporal_split: all events share timestamp " +
                                std::to_string(stamps.front()) + "; no temporal order to split");
  }
  const auto rank = static_cast<std::size_t>(
      std::ceil(quantile * static_cast<double>(stamps.size())));
  const std::int64_t cutoff = stamps[std::min(rank, stamps.size()) - 1];

  // Events are sorted by (user, ts); collect each user's slice.
  struct UserSlice {
    std::int64_t user;
    std::vector<std::int64_t> items;
    std::vector<std::int64_t> ts;
    std::size_t n_pre = 0;  // events with ts <= cutoff (a prefix of the slice)
  };
  std::vector<UserSlice> slices;
  for (std::size_t i = 0; i < log.events.size();) {
    UserSlice s;
    s.user = log.events[i].user;
    while (i < log.events.size() && log.events[i].user == s.user) {
      s.items.push_back(log.events[i].item);
      s.ts.push_back(log.events[i].ts);
      if (log.events[i].ts <= cutoff) ++s.n_pre;
      ++i;
    }
    slices.push_back(std::move(s));
  }

  // Seeded validation-user draw from the pool of users with pre-cutoff
  // history: shuffle the pool, take the leading floor(frac * pool) users.
  std::vector<std::size_t> pool;
  for (std::size_t s = 0; s < slices.size(); ++s) {
    if (slices[s].n_pre >= 1) pool.push_back(s);
  }
  SplitMix64 draw = rng.derived(0);
  for (std::size_t i = pool.size(); i > 1; --i) {
    std::swap(pool[i - 1], pool[draw.bounded(i)]);
  }
  const auto n_val = static_cast<std::size_t>(
      std::floor(val_user_frac * static_cast<double>(pool.size())));
  std::vector<bool> is_val_user(slices.size(), false);
  for (std::size_t i = 0; i < n_val; ++i) is_val_user[pool[i]] = true;

  SplitSpec split;
  split.cutoff_ts = cutoff;
  for (std::size_t idx = 0; idx < slices.size(); ++idx) {
    const UserSlice& s = slices[idx];
    std::size_t train_len = s.n_pre;
    if (is_val_user[idx] && s.n_pre >= 2) {
      // Withhold the last pre-cutoff event as this user's validation target.
      EvalPair pair;
      pair.user = s.user;
      pair.prefix.assign(s.items.begin(), s.items.begin() + static_cast<std::ptrdiff_t>(s.n_pre - 1));
      pair.target = s.items[s.n_pre - 1];
      pair.target_ts = s.ts[s.n_pre - 1];
      split.valid.push_back(std::move(pair));
      train_len = s.n_pre - 1;
    }
    if (train_len >= 1) {
      Sequence seq;
      seq.user = s.user;
      seq.items.assign(s.items.begin(), s.items.begin() + static_cast<std::ptrdiff_t>(train_len));
      seq.ts.assign(s.ts.begin(), s.ts.begin() + static_cast<std::ptrdiff_t>(train_len));
      split.train.push_back(std::move(seq));
    }
    if (s.n_pre < s.items.size() && s.items.size() >= 2) {
      // Last event is post-cutoff: it is this user's test target.
      EvalPair pair;
      pair.user = s.user;
      pair.prefix.assign(s.items.begin(), s.items.end() - 1);
      pair.target = s.items.back();
      pair.target_ts = s.ts.back();
      split.test.push_back(std::move(pair));
    }
  }
  return split;
}

PopularityTable popularity_from_training(const SplitSpec& split, std::size_t catalog) {
  std::vector<std::int64_t> counts(catalog, 0);
  for (const Sequence& seq : split.train) {
    for (std::int64_t item : seq.items) {
      if (item < 0 || static_cast<std::size_t>(item) >= catalog) {
        throw std::invalid_argument("popularity_from_training: item " + std::to_string(item) +
                                    " outside catalog of " + std::to_string(catalog));
      }
      ++counts[static_cast<std::size_t>(item)];
    }
  }
  return PopularityTable::FromCounts(std::move(counts));
}

void assert_no_leakage(const SplitSpec& split) {
  std::set<std::tuple<std::int64_t, std::int64_t, std::int64_t>> train_events;
  for (const Sequence& seq : split.train) {
    for (std::size_t i = 0; i < seq.items.size(); ++i) {
      train_events.emplace(seq.user, seq.items[i], seq.ts[i]);
    }
  }
  auto check = [&](const std::vector<EvalPair>& pairs, const char* which) {
    for (const EvalPair& p : pairs) {
      if (train_events.count({p.user, p.target, p.target_ts})) {
        throw std::logic_error(std::string("leakage: ") + which + " target (user " +
                               std::to_string(p.user) + ", item " + std::to_string(p.target) +
                               ", ts " + std::to_string(p.target_ts) +
                               ") also appears in a training sequence");
      }
    }
  };
  check(split.valid, "validation");
  check(split.test, "test");
}

}  // namespace lseforge
