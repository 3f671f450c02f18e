#include "seldpair/tensors.hpp"

#include <string>

namespace seldpair {

void ScoreTensor::validate() const {
    if (num_frames < 0 || num_pairs < 1 || num_classes < 1)
        throw ValidationError("ScoreTensor: non-positive dimensions");
    if (data.size() != static_cast<size_t>(num_frames) * num_pairs * num_classes)
        throw ValidationError("ScoreTensor: data size does not match dims");
    for (double v : data)
        if (!(v >= 0.0 && v <= 1.0))
            throw ValidationError("ScoreTensor: score outside [0,1]");
}

void TdoaTensor::validate() const {
    if (num_frames < 0 || num_pairs < 1 || num_classes < 1)
        throw ValidationError("TdoaTensor: non-positive dimensions");
    if (data.size() != static_cast<size_t>(num_frames) * num_pairs * num_classes)
        throw ValidationError("TdoaTensor: data size does not match dims");
    if (!(tau_max > 0)) throw ValidationError("TdoaTensor: tau_max must be positive");
    for (int t = 0; t < num_frames; ++t) {
        for (int c = 0; c < num_classes; ++c) {
            const bool masked = std::isnan(at(t, 0, c));
            for (int p = 0; p < num_pairs; ++p) {
                const double v = at(t, p, c);
                if (std::isnan(v) != masked)
                    throw ValidationError("TdoaTensor: mask disagrees across pairs at frame " +
                                          std::to_string(t) + ", class " + std::to_string(c));
                if (!masked && std::abs(v) > tau_max)
                    throw ValidationError("TdoaTensor: |tdoa| exceeds tau_max at frame " +
                                          std::to_string(t));
            }
        }
    }
}

void check_same_shape(const ScoreTensor& scores, const TdoaTensor& tdoas) {
    if (scores.num_frames != tdoas.num_frames || scores.num_pairs != tdoas.num_pairs ||
        scores.num_classes != tdoas.num_classes)
        throw ValidationError("score and TDOA tensors disagree on shape");
}

}  // namespace seldpair
