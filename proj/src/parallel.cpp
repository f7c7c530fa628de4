// Copyright 2026 The rigidflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "rigidflow/parallel.hpp"

#include <cstdlib>
#include <string>
#include <thread>

namespace rigidflow {

int thread_budget() {
  int budget = static_cast<int>(std::thread::hardware_concurrency());
  if (budget <= 0) budget = 1;
  if (const char* env = std::getenv("EMRMSF_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap > 0) budget = std::min(budget, cap);
    } catch (const std::exception&) {
      // Unparseable values leave the default in place.
    }
  }
  return budget;
}

void parallel_rows(int rows, const std::function<void(int)>& fn) {
  if (rows <= 0) return;
  const int threads = std::min(thread_budget(), rows);
  if (threads <= 1 || rows < 8) {
    for (int y = 0; y < rows; ++y) fn(y);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const int chunk = (rows + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int begin = t * chunk;
    const int end = std::min(rows, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([begin, end, &fn] {
      for (int y = begin; y < end; ++y) fn(y);
    });
  }
  for (auto& th : pool) th.join();
}

double sum_rows(int rows, const std::function<double(int)>& row_sum) {
  std::vector<double> partials(static_cast<std::size_t>(std::max(rows, 0)));
  parallel_rows(rows, [&](int y) { partials[y] = row_sum(y); });
  KahanSum total;
  for (double p : partials) total.add(p);
  return total.value();
}

}  // namespace rigidflow
