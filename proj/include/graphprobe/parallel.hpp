#pragma once

#include <cstddef>
#include <exception>
#include <vector>

#include <omp.h>

namespace gp {

/// Serial reference runner: fn(0), fn(1), ..., fn(n-1).
template <class Fn>
void run_jobs_serial(std::size_t n, Fn&& fn) {
  for (std::size_t i = 0; i < n; ++i) fn(i);
}

/// Runs fn(i) for i in [0, n) on up to `jobs` OpenMP threads. Every job must
/// write only to its own slot and draw randomness from its own derived seed;
/// then the result is identical to run_jobs_serial. If any job throws, the
/// exception of the lowest-indexed failing job is rethrown after all jobs end.
template <class Fn>
void run_jobs(std::size_t n, std::size_t jobs, Fn&& fn) {
  if (jobs <= 1 || n <= 1) {
    run_jobs_serial(n, fn);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(static_cast<int>(jobs))
  for (long long i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace gp
