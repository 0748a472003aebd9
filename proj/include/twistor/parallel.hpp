#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace twistor {

/// Execution settings for grid-wide operations. Results never depend on `threads`.
struct Exec {
  int threads = 1;
};

/// Resolves a thread count: explicit flag, then TWISTOR_FORGE_THREADS, then 1.
inline int resolve_threads(int flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("TWISTOR_FORGE_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
    }
  }
  return 1;
}

/// Runs fn(i) for i in [0, count). Each index is visited exactly once; the first exception
/// (in index order within a chunk) is rethrown on the calling thread.
template <class Fn>
void parallel_for(std::size_t count, const Exec& exec, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(exec.threads, 1), std::max<std::size_t>(count, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      const std::size_t lo = w * chunk, hi = std::min(count, lo + chunk);
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace twistor
