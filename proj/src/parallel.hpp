#pragma once

#include <exception>
#include <mutex>

#include <omp.h>

namespace urnfield::detail {

inline int resolve_threads(int requested) { return requested > 0 ? requested : omp_get_max_threads(); }

// Exceptions must not cross an OpenMP region boundary; capture the first
// and rethrow after the join.
class FirstError {
 public:
  template <class Fn>
  void guard(Fn&& fn) {
    try {
      fn();
    } catch (...) {
      std::lock_guard lock(mutex_);
      if (!error_) error_ = std::current_exception();
    }
  }

  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::mutex mutex_;
  std::exception_ptr error_;
};

}  // namespace urnfield::detail
