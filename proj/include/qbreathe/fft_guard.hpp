#pragma once

#include <mutex>

namespace qbreathe {

// FFTW plan creation/destruction is not thread-safe; executing distinct
// plans is.  Every translation unit that plans must hold this one lock.
inline std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace qbreathe
