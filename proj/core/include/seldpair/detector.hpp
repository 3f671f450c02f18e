#pragma once

#include "seldpair/dsp.hpp"
#include "seldpair/tensors.hpp"

namespace seldpair {

/// Energy-based stand-in for a learned event detector. It scores activity per
/// pair from normalized log cross-band energy and estimates one TDOA per
/// (frame, pair) from per-frame GCC-PHAT. No class discrimination is
/// attempted: scores are replicated across classes.
struct DetectorConfig {
    double noise_floor_percentile = 20.0;
    int smoothing_frames = 5;
    bool single_class_mode = true;
    int num_classes = 1;  // used when single_class_mode is off

    void validate() const;
};

struct DetectorOutput {
    ScoreTensor scores;
    TdoaTensor tdoas;
};

DetectorOutput detect(const Spectrogram& spec, const TdoaLattice& lattice,
                      const DetectorConfig& config);

}  // namespace seldpair
