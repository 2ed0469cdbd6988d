#include "lseforge/threads.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace lseforge {

int resolve_worker_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("LSEFORGE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) {
      throw std::invalid_argument("LSEFORGE_THREADS must be a positive integer, got '" +
                                  std::string(env) + "'");
    }
    return static_cast<int>(v);
  }
  return 1;
}

std::size_t effective_workers(std::size_t n_blocks, int workers) {
  if (workers < 1) {
    throw std::invalid_argument("effective_workers: workers must be >= 1, got " +
                                std::to_string(workers));
  }
  return std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(workers), n_blocks));
}

void parallel_blocks(std::size_t n_blocks, int workers,
                     const std::function<void(std::size_t, std::size_t)>& fn) {
  const std::size_t w = effective_workers(n_blocks, workers);
  if (w <= 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) fn(0, b);
    return;
  }

  std::vector<std::exception_ptr> errors(w);
  auto run_range = [&](std::size_t worker) {
    const std::size_t lo = n_blocks * worker / w;
    const std::size_t hi = n_blocks * (worker + 1) / w;
    try {
      for (std::size_t b = lo; b < hi; ++b) fn(worker, b);
    } catch (...) {
      errors[worker] = std::current_exception();
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(w - 1);
  for (std::size_t i = 1; i < w; ++i) pool.emplace_back(run_range, i);
  run_range(0);
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace lseforge
