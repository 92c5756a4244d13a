#pragma once

#include <omp.h>

#include <cstddef>
#include <exception>
#include <stdexcept>
#include <string>
#include <vector>

#include "segthresh/errors.hpp"

namespace segthresh::detail {

/// Runs body(i) for i in [0, n) on `workers` OpenMP threads. Exceptions are
/// caught per item; afterwards the lowest-index failure is rethrown as an
/// ItemError named by name_of(i), so the reported error does not depend on
/// scheduling.
template <class Body, class NameOf>
void parallel_items(std::size_t n, int workers, Body&& body, NameOf&& name_of) {
  if (workers < 1) throw std::invalid_argument("worker count must be at least 1");
  std::vector<std::exception_ptr> failures(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      failures[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!failures[i]) continue;
    try {
      std::rethrow_exception(failures[i]);
    } catch (const ItemError&) {
      throw;
    } catch (const std::exception& e) {
      throw ItemError(name_of(i), e.what());
    }
  }
}

}  // namespace segthresh::detail
