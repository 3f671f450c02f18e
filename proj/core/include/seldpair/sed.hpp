#pragma once

#include <cstdint>
#include <vector>

#include "seldpair/tensors.hpp"

namespace seldpair {

/// Per-class decision threshold on fused scores.
struct ThresholdSet {
    std::vector<double> epsilon;

    int num_classes() const { return static_cast<int>(epsilon.size()); }
    void validate() const;
};

/// Pair-fused scores, [frame][class].
struct FrameScores {
    int num_frames = 0;
    int num_classes = 0;
    std::vector<double> values;

    double& at(int t, int c) { return values[static_cast<size_t>(t) * num_classes + c]; }
    double at(int t, int c) const { return values[static_cast<size_t>(t) * num_classes + c]; }
};

/// Binary frame activity, [frame][class].
struct FrameActivity {
    int num_frames = 0;
    int num_classes = 0;
    std::vector<std::uint8_t> values;

    std::uint8_t& at(int t, int c) { return values[static_cast<size_t>(t) * num_classes + c]; }
    std::uint8_t at(int t, int c) const {
        return values[static_cast<size_t>(t) * num_classes + c];
    }

    void resize(int frames, int classes) {
        num_frames = frames;
        num_classes = classes;
        values.assign(static_cast<size_t>(frames) * classes, 0);
    }
};

/// Binary segment activity, [segment][class]. A segment covers segment_frames
/// consecutive frames; the final segment may be shorter but still counts.
struct SegmentActivity {
    int num_segments = 0;
    int num_classes = 0;
    int segment_frames = 0;

    std::vector<std::uint8_t> values;

    std::uint8_t& at(int l, int c) { return values[static_cast<size_t>(l) * num_classes + c]; }
    std::uint8_t at(int l, int c) const {
        return values[static_cast<size_t>(l) * num_classes + c];
    }

    void resize(int segments, int classes) {
        num_segments = segments;
        num_classes = classes;
        values.assign(static_cast<size_t>(segments) * classes, 0);
    }
};

/// Full frame-to-segment decision chain for one recording.
struct EventTimeline {
    FrameScores fused;
    FrameActivity activity;
    SegmentActivity segments;
};

/// Mean of the per-pair scores: e[t][c] = (1/P) * sum_p scores[t][p][c].
FrameScores fuse_scores(const ScoreTensor& tensor);

/// Activity = 1 iff fused score >= epsilon[c] (inclusive).
FrameActivity threshold_scores(const FrameScores& fused, const ThresholdSet& thresholds);

/// Removes, per class, every maximal run of consecutive active frames shorter
/// than min_frames. Gaps are never bridged.
FrameActivity postfilter(const FrameActivity& activity, int min_frames);

/// ORs frame activity over blocks of segment_frames; ceil(T/L) segments, the
/// final partial block included.
SegmentActivity to_segments(const FrameActivity& activity, int segment_frames);

/// Runs the whole chain with one threshold set.
EventTimeline build_timeline(const ScoreTensor& tensor, const ThresholdSet& thresholds,
                             int min_frames, int segment_frames);

struct TuningExample {
    ScoreTensor scores;
    SegmentActivity reference;
};

/// Scans epsilon in {0, grid_step, 2*grid_step, ..., 1} per class and picks the
/// value maximizing that class's segment F-score over the validation set, with
/// the full threshold -> postfilter -> segment chain applied at each candidate.
/// Ties go to the smallest epsilon. Empty-vs-empty predictions score F = 1.
ThresholdSet tune_thresholds(const std::vector<TuningExample>& validation, int min_frames,
                             double grid_step = 0.01);

}  // namespace seldpair
