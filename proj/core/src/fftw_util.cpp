#include "fftw_util.hpp"

namespace seldpair::detail {

std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace seldpair::detail
