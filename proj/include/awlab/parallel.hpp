#pragma once

#include <mpfr.h>

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace awlab {

// Runs fn(i) for i in [0, n) across `workers` threads. Callers store results
// by index, so the output is identical for any worker count; only wall time
// changes. fn must be safe to run concurrently for distinct indices.
template <typename F>
void parallel_for(unsigned long n, unsigned workers, F&& fn) {
  if (workers <= 1 || n <= 1) {
    for (unsigned long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<unsigned long> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto body = [&]() {
    while (true) {
      unsigned long i = next.fetch_add(1);
      if (i >= n) break;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        break;
      }
    }
    mpfr_free_cache();  // constants cache is thread-local
  };

  std::vector<std::thread> threads;
  unsigned spawn = std::min<unsigned long>(workers, n) - 1;
  threads.reserve(spawn);
  for (unsigned w = 0; w < spawn; ++w) threads.emplace_back(body);
  body();
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace awlab
