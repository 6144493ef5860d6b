#include "oseen_rotor/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <string>

#include "oseen_rotor/types.hpp"

namespace oseen_rotor {

int default_jobs() {
  const char* env = std::getenv("OSEEN_ROTOR_JOBS");
  if (env == nullptr || *env == '\0') return 1;
  try {
    const int j = std::stoi(env);
    if (j < 1) throw DomainError("OSEEN_ROTOR_JOBS must be >= 1");
    return j;
  } catch (const std::logic_error&) {
    throw DomainError(std::string("invalid OSEEN_ROTOR_JOBS value '") + env + "'");
  }
}

void parallel_for(std::size_t n, int jobs,
                  const std::function<void(std::size_t)>& fn) {
  if (jobs < 1) throw DomainError("jobs must be >= 1");
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> first_failure{std::numeric_limits<std::size_t>::max()};
  std::mutex mu;
  std::exception_ptr error;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n || i > first_failure.load()) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (i < first_failure.load()) {
          first_failure = i;
          error = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace oseen_rotor
