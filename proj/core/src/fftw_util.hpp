#pragma once

#include <mutex>

namespace seldpair::detail {

// FFTW plan creation/destruction is not thread-safe; execution is.
std::mutex& fftw_plan_mutex();

}  // namespace seldpair::detail
