#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace bandlab {

/// Worker count for the exhaustive kernels. 0 means hardware concurrency.
struct Parallelism {
  unsigned threads = 1;

  unsigned resolved() const {
    if (threads != 0) return threads;
    return std::max(1u, std::thread::hardware_concurrency());
  }
};

/// Runs `body(index, local)` for every index in [0, count) across workers,
/// each owning a private accumulator, then folds the accumulators with
/// `combine`. The result is schedule-independent as long as `combine` is a
/// total order on candidates (value, then witness).
template <class Acc, class Body, class Combine>
Acc deterministic_reduce(std::size_t count, Parallelism par, Acc init, Body body, Combine combine) {
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(par.resolved(), std::max<std::size_t>(count, 1)));
  if (workers <= 1) {
    Acc acc = init;
    for (std::size_t i = 0; i < count; ++i) body(i, acc);
    return acc;
  }
  std::vector<Acc> locals(workers, init);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      // Strided assignment balances the triangular loops of the kernels.
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < count; i += workers) body(i, locals[w]);
      });
    }
  }
  Acc acc = init;
  for (const Acc& local : locals) acc = combine(acc, local);
  return acc;
}

}  // namespace bandlab
