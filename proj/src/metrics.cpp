#include "lseforge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "lseforge/threads.hpp"

namespace lseforge {

EvalSummary evaluate(const ToyEncoderParams& params, std::span<const EvalPair> pairs,
                     std::size_t k, const std::vector<std::int64_t>& popularity_counts,
                     int workers) {
  if (pairs.empty()) {
    throw std::invalid_argument("evaluate: no eval pairs");
  }
  if (k == 0) {
    throw std::invalid_argument("evaluate: k must be >= 1");
  }
  const std::size_t v = params.catalog();
  if (popularity_counts.size() != v) {
    throw std::invalid_argument("evaluate: popularity table size does not match the catalog");
  }
  double total = 0.0;
  for (std::int64_t c : popularity_counts) {
    if (c < 0) throw std::invalid_argument("evaluate: negative popularity count");
    total += static_cast<double>(c);
  }
  if (total < 2.0) {
    throw std::invalid_argument("evaluate: popularity table needs at least 2 training events");
  }
  const double log2_total = std::log2(total);
  const std::size_t k_eff = std::min(k, v);

  const std::size_t n = pairs.size();
  std::vector<double> ndcg(n, 0.0);
  std::vector<double> surprisal(n, 0.0);
  std::vector<std::vector<std::int64_t>> topk(n);

  const int w = resolve_worker_count(workers);
  parallel_blocks(n, w, [&](std::size_t /*worker*/, std::size_t i) {
    const EvalPair& pair = pairs[i];
    const std::vector<double> h = encode(params, pair.prefix);
    const std::size_t d = params.hidden();

    std::vector<double> scores(v, 0.0);
    for (std::size_t kk = 0; kk < d; ++kk) {
      const double hk = h[kk];
      const float* crow = params.c.row_ptr(kk);
      for (std::size_t j = 0; j < v; ++j) scores[j] += hk * static_cast<double>(crow[j]);
    }

    const std::size_t t = static_cast<std::size_t>(pair.target);
    const double st = scores[t];
    std::size_t rank = 1;
    for (std::size_t j = 0; j < v; ++j) {
      if (scores[j] > st || (scores[j] == st && j < t)) ++rank;
    }
    ndcg[i] = rank <= k_eff ? 1.0 / std::log2(static_cast<double>(rank) + 1.0) : 0.0;

    std::vector<std::int64_t> order(v);
    std::iota(order.begin(), order.end(), std::int64_t{0});
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k_eff),
                      order.end(), [&](std::int64_t a, std::int64_t b) {
                        const double sa = scores[static_cast<std::size_t>(a)];
                        const double sb = scores[static_cast<std::size_t>(b)];
                        if (sa != sb) return sa > sb;
                        return a < b;
                      });
    order.resize(k_eff);

    double acc = 0.0;
    for (std::int64_t item : order) {
      const double c =
          static_cast<double>(std::max<std::int64_t>(popularity_counts[static_cast<std::size_t>(item)], 1));
      acc += -std::log2(c / total) / log2_total;
    }
    surprisal[i] = acc / static_cast<double>(k_eff);
    topk[i] = std::move(order);
  });

  EvalSummary out;
  std::vector<char> seen(v, 0);
  std::size_t distinct = 0;
  double ndcg_sum = 0.0;
  double surp_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ndcg_sum += ndcg[i];
    surp_sum += surprisal[i];
    for (std::int64_t item : topk[i]) {
      if (!seen[static_cast<std::size_t>(item)]) {
        seen[static_cast<std::size_t>(item)] = 1;
        ++distinct;
      }
    }
  }
  out.ndcg = ndcg_sum / static_cast<double>(n);
  out.surprisal = surp_sum / static_cast<double>(n);
  out.coverage = static_cast<double>(distinct) / static_cast<double>(v);
  return out;
}

}  // namespace lseforge
