#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace kb {

enum class Exec { Serial, Parallel };

// Index-space driver used by the grid scans and portrait loops. The body must
// be pure per index (writes only to its own slot); that keeps the parallel
// schedule irrelevant to the result, so serial and parallel runs agree bitwise.
template <class Body>
void for_each_index(std::size_t n, Exec exec, Body&& body) {
  if (exec == Exec::Serial) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8)
  for (long long i = 0; i < (long long)n; ++i) body((std::size_t)i);
#else
  for (std::size_t i = 0; i < n; ++i) body(i);
#endif
}

inline int hardware_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace kb
