#include "seldpair/pipeline.hpp"

#include "seldpair/detector.hpp"
#include "seldpair/dsp.hpp"

namespace seldpair {

DetectionResult run_detection(const std::vector<std::vector<double>>& channels,
                              const CalibrationTable& calibration, const RunConfig& config) {
    config.validate();
    if (static_cast<int>(channels.size()) != calibration.num_mics)
        throw ValidationError("run_detection: " + std::to_string(channels.size()) +
                              " channels, calibration expects " +
                              std::to_string(calibration.num_mics));
    const Spectrogram spec = compute_stft(channels, config.stft);
    DetectorOutput det = detect(spec, config.lattice(), config.detector);
    return run_detection(std::move(det.scores), std::move(det.tdoas), calibration, config);
}

DetectionResult run_detection(ScoreTensor scores, TdoaTensor tdoas,
                              const CalibrationTable& calibration, const RunConfig& config) {
    config.validate();
    scores.validate();
    tdoas.validate();
    check_same_shape(scores, tdoas);
    if (scores.num_pairs != calibration.num_pairs())
        throw ValidationError("run_detection: tensor has " + std::to_string(scores.num_pairs) +
                              " pairs, calibration " + std::to_string(calibration.num_pairs()));

    DetectionResult result;
    result.scores = std::move(scores);
    result.tdoas = std::move(tdoas);
    result.timeline =
        build_timeline(result.scores, config.thresholds_for(result.scores.num_classes),
                       config.min_event_frames, config.segment_frames);
    result.doas =
        estimate_doas(result.tdoas, result.timeline.activity, calibration, config.kernel);
    return result;
}

}  // namespace seldpair
