#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace dtprs {

// Selects between the OpenMP kernels and their serial reference paths.
// Results never depend on the choice; parallel loops write into pre-sized
// slots and are merged in index order.
struct ExecPolicy {
  bool parallel = true;

  static ExecPolicy serial() { return ExecPolicy{false}; }
  static ExecPolicy threaded() { return ExecPolicy{true}; }
};

// Process-wide default, switched off by `--single-threaded`.
ExecPolicy& default_policy();

// Runs fn(i) for i in [0, n). The first exception thrown by any iteration is rethrown.
template <class Fn>
void parallel_for(std::size_t n, const ExecPolicy& policy, Fn&& fn) {
  if (!policy.parallel || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex guard;
  const long count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(guard);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace dtprs
