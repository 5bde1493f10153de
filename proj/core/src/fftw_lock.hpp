#pragma once

#include <mutex>

namespace exitwalk::detail {

// FFTW planning is not thread safe; every translation unit that creates or
// destroys plans must hold this lock while doing so.
inline std::mutex& fftw_plan_lock() {
  static std::mutex m;
  return m;
}

} // namespace exitwalk::detail
