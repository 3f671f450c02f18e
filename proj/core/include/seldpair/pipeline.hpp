#pragma once

#include <vector>

#include "seldpair/calibration.hpp"
#include "seldpair/config.hpp"
#include "seldpair/doa.hpp"
#include "seldpair/sed.hpp"
#include "seldpair/tensors.hpp"

namespace seldpair {

struct DetectionResult {
    ScoreTensor scores;
    TdoaTensor tdoas;
    EventTimeline timeline;
    DoaOutput doas;
};

/// Full chain from audio: STFT, baseline detector, score fusion, thresholds,
/// post-filter, segments, and the per-class DOA scan.
DetectionResult run_detection(const std::vector<std::vector<double>>& channels,
                              const CalibrationTable& calibration, const RunConfig& config);

/// Same chain starting from externally produced tensors.
DetectionResult run_detection(ScoreTensor scores, TdoaTensor tdoas,
                              const CalibrationTable& calibration, const RunConfig& config);

}  // namespace seldpair
