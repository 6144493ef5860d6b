#pragma once

// Deterministic fan-out: results land in pre-allocated slots indexed by task,
// so the outcome never depends on the number of threads or on scheduling.

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace oseen_rotor {

/// Worker count from OSEEN_ROTOR_JOBS, else 1.
int default_jobs();

/// Calls fn(i) for i in [0, n) on up to `jobs` threads. If any call throws,
/// the exception of the smallest failing index is rethrown after all
/// workers have stopped.
void parallel_for(std::size_t n, int jobs,
                  const std::function<void(std::size_t)>& fn);

/// Evaluates fn at every index into a vector, in index order.
template <class T, class F>
std::vector<T> parallel_map(std::size_t n, int jobs, F&& fn) {
  std::vector<T> out(n);
  parallel_for(n, jobs, [&](std::size_t i) { out[i] = fn(i); });
  return out;
}

}  // namespace oseen_rotor
