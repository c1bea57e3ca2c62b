#pragma once

#include <exception>
#include <mutex>

namespace mcam {

// OpenMP-backed parallel loop that captures the first exception and rethrows
// it after the region, instead of terminating the process.
template <typename Fn>
void parallel_indexed(int n, Fn&& fn) {
  std::exception_ptr error;
  std::mutex mutex;
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      fn(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(mutex);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace mcam
