#include <doctest.h>

#include <cmath>
#include <vector>

#include "seldpair/detector.hpp"
#include "seldpair/geometry.hpp"
#include "seldpair/metrics.hpp"
#include "seldpair/sed.hpp"
#include "seldpair/sim.hpp"

using namespace seldpair;

namespace {

SceneScript one_event_script(double snr_db, std::uint64_t seed) {
    SceneScript s;
    s.duration_sec = 4.0;
    s.seed = seed;
    s.noise_std = 0.01;
    SceneEvent ev;
    ev.klass = 0;
    ev.onset_sec = 1.0;
    ev.offset_sec = 2.5;
    ev.doa_index = 120;
    ev.snr_db = snr_db;
    s.events = {ev};
    return s;
}

Spectrogram render(const SceneScript& script) {
    const SimulatedScene scene =
        synthesize(script, regular_tetrahedron(0.042), StftConfig{}, DoaGrid{}, 20.0, 50);
    return compute_stft(scene.signals, StftConfig{});
}

}  // namespace

TEST_CASE("config validation") {
    DetectorConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.noise_floor_percentile = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = DetectorConfig{};
    cfg.smoothing_frames = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = DetectorConfig{};
    cfg.single_class_mode = false;
    cfg.num_classes = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("detection is deterministic and honors tensor invariants") {
    const Spectrogram spec = render(one_event_script(20.0, 7));
    TdoaLattice lattice;
    const DetectorConfig cfg;

    const DetectorOutput a = detect(spec, lattice, cfg);
    const DetectorOutput b = detect(spec, lattice, cfg);
    CHECK(a.scores.data == b.scores.data);
    CHECK(a.tdoas.data == b.tdoas.data);

    CHECK(a.scores.num_frames == spec.num_frames);
    CHECK(a.scores.num_pairs == 6);
    CHECK(a.scores.num_classes == 1);
    CHECK_NOTHROW(a.scores.validate());
    CHECK_NOTHROW(a.tdoas.validate());
    CHECK_NOTHROW(check_same_shape(a.scores, a.tdoas));
    for (int t = 0; t < a.tdoas.num_frames; ++t) CHECK(a.tdoas.valid(t, 0));
}

TEST_CASE("multi-class mode replicates scores across classes") {
    const Spectrogram spec = render(one_event_script(20.0, 7));
    TdoaLattice lattice;
    DetectorConfig cfg;
    cfg.single_class_mode = false;
    cfg.num_classes = 3;

    const DetectorOutput out = detect(spec, lattice, cfg);
    CHECK(out.scores.num_classes == 3);
    for (int t = 0; t < out.scores.num_frames; ++t)
        for (int p = 0; p < 6; ++p)
            for (int c = 1; c < 3; ++c) {
                CHECK(out.scores.at(t, p, c) == out.scores.at(t, p, 0));
                CHECK(out.tdoas.at(t, p, c) == out.tdoas.at(t, p, 0));
            }
}

TEST_CASE("a faint short event leaves most frames near the noise floor") {
    // 0.2 s event at 0 dB SNR in a 4 s scene: the event still sets the
    // normalization peak, so the noise-dominated majority scores low.
    SceneScript script;
    script.duration_sec = 4.0;
    script.seed = 97;
    script.noise_std = 0.01;
    SceneEvent ev;
    ev.klass = 0;
    ev.onset_sec = 1.9;
    ev.offset_sec = 2.1;
    ev.doa_index = 120;
    ev.snr_db = 0.0;
    script.events = {ev};

    const Spectrogram spec = compute_stft(
        synthesize(script, regular_tetrahedron(0.042), StftConfig{}, DoaGrid{}, 20.0, 50).signals,
        StftConfig{});
    TdoaLattice lattice;
    const DetectorOutput out = detect(spec, lattice, DetectorConfig{});

    const FrameScores fused = fuse_scores(out.scores);
    int low = 0;
    for (int t = 0; t < fused.num_frames; ++t) low += fused.at(t, 0) <= 0.5;
    CHECK(static_cast<double>(low) >= 0.9 * fused.num_frames);
}

TEST_CASE("a loud event is segmented to F >= 0.9") {
    const SceneScript script = one_event_script(20.0, 19);
    const SimulatedScene scene =
        synthesize(script, regular_tetrahedron(0.042), StftConfig{}, DoaGrid{}, 20.0, 50);
    const Spectrogram spec = compute_stft(scene.signals, StftConfig{});
    TdoaLattice lattice;
    const DetectorOutput out = detect(spec, lattice, DetectorConfig{});

    ThresholdSet th;
    th.epsilon = {0.5};
    const EventTimeline tl = build_timeline(out.scores, th, 5, 50);
    const auto [er, f] = compute_er_f(segment_counts(tl.segments, scene.ref_segments));
    CHECK(f >= 0.9);
}

TEST_CASE("raising the event energy never lowers the mean active score") {
    const SceneScript quiet = one_event_script(10.0, 33);
    const SceneScript loud = one_event_script(20.0, 33);
    const SimulatedScene sq =
        synthesize(quiet, regular_tetrahedron(0.042), StftConfig{}, DoaGrid{}, 20.0, 50);
    const SimulatedScene sl =
        synthesize(loud, regular_tetrahedron(0.042), StftConfig{}, DoaGrid{}, 20.0, 50);
    TdoaLattice lattice;
    const DetectorOutput oq = detect(compute_stft(sq.signals, StftConfig{}), lattice, {});
    const DetectorOutput ol = detect(compute_stft(sl.signals, StftConfig{}), lattice, {});

    auto mean_active = [](const DetectorOutput& out, const FrameActivity& ref) {
        const FrameScores fused = fuse_scores(out.scores);
        double acc = 0.0;
        int n = 0;
        for (int t = 0; t < fused.num_frames; ++t)
            if (ref.at(t, 0)) {
                acc += fused.at(t, 0);
                ++n;
            }
        return acc / n;
    };
    CHECK(mean_active(ol, sl.ref_activity) + 1e-12 >= mean_active(oq, sq.ref_activity));
}
