#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace cli {

// Runs job(worker, i) for i in [0, n) on `workers` threads. Results are
// written by the job into slot i, so output order is the index order.
// The first exception thrown by any job is rethrown after all threads join.
inline void parallel_for(int n, int workers, const std::function<void(int worker, int i)>& job) {
  if (workers <= 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, n));
  std::atomic<int> next{0};
  std::exception_ptr first;
  std::atomic<bool> failed{false};
  auto run = [&](int w) {
    for (int i; !failed && (i = next++) < n;) {
      try {
        job(w, i);
      } catch (...) {
        if (!failed.exchange(true)) first = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> th;
    for (int w = 0; w < workers; ++w) th.emplace_back(run, w);
    for (auto& t : th) t.join();
  }
  if (first) std::rethrow_exception(first);
}

}  // namespace cli
