#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "seldpair/geometry.hpp"
#include "seldpair/io.hpp"
#include "seldpair/tensors.hpp"

namespace seldpair {

enum class SourceKind { white_noise, tone, impulse_train };

struct SceneEvent {
    int klass = 0;
    double onset_sec = 0.0;
    double offset_sec = 0.0;
    int doa_index = 0;
    SourceKind kind = SourceKind::white_noise;
    double snr_db = 20.0;
    double tone_hz = 1000.0;  // tone sources only
};

struct SceneScript {
    double duration_sec = 0.0;
    std::uint64_t seed = 0;
    double noise_std = 0.01;  // per-channel background RMS
    std::vector<SceneEvent> events;

    int num_classes() const;
    /// onset < offset <= duration, DOA on grid, no same-class overlap.
    void validate(const DoaGrid& grid) const;
};

struct SimulatedScene {
    std::vector<std::vector<double>> signals;  // [mic][sample]
    int num_frames = 0;

    FrameActivity ref_activity;
    SegmentActivity ref_segments;
    FrameDoas ref_doas;
    std::vector<int> single_source_doa;  // per frame: q or -1

    ScoreTensor oracle_scores;
    TdoaTensor oracle_tdoas;
    std::vector<LabelRecord> labels;
};

/// Renders each event once, spatializes it per channel with a frequency-domain
/// fractional delay from the free-field predictor, mixes in independent white
/// Gaussian noise (only when the script has events), and derives reference
/// labels plus oracle tensors from the script.
SimulatedScene synthesize(const SceneScript& script, const ArrayGeometry& geometry,
                          const StftConfig& stft, const DoaGrid& grid, double tau_max,
                          int segment_frames);

/// Circular fractional delay of `signal` inside a zero-padded buffer at least
/// `pad` samples longer, via a frequency-domain phase ramp; conserves energy
/// to machine precision. The buffer length is odd and FFT-friendly.
std::vector<double> fractional_delay(std::span<const double> signal, double delay_samples,
                                     int pad);

/// Deterministic stream seeding: mixes a base seed with a stream tag.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t tag);

/// Script JSON: {duration_sec, seed?, noise_std?, events: [{class, onset_sec,
/// offset_sec, doa_index | (azimuth_deg, elevation_deg), kind?, snr_db?,
/// tone_hz?}]}.
SceneScript load_scene_script(const std::string& path, const DoaGrid& grid);

}  // namespace seldpair
