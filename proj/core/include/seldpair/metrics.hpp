#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "seldpair/grid.hpp"
#include "seldpair/sed.hpp"

namespace seldpair {

/// Segment-level confusion tallies. S/D/I follow the substitution, deletion,
/// insertion decomposition: S = min(FN,FP), D = max(0,FN-FP), I = max(0,FP-FN).
struct SegmentCounts {
    struct Entry {
        int tp = 0, fn = 0, fp = 0, n = 0;
        int s = 0, d = 0, i = 0;
    };
    std::vector<Entry> segments;

    Entry totals() const {
        Entry t;
        for (const auto& e : segments) {
            t.tp += e.tp;
            t.fn += e.fn;
            t.fp += e.fp;
            t.n += e.n;
            t.s += e.s;
            t.d += e.d;
            t.i += e.i;
        }
        return t;
    }
};

struct MetricsReport {
    double er = 0.0;
    double f = 0.0;
    std::optional<double> doae;  // empty when no DOAs were estimated
    double fr = 0.0;

    long frames_evaluated = 0;
    long est_doa_count = 0;
    long ref_doa_count = 0;
    long matched_doa_count = 0;
};

SegmentCounts segment_counts(const SegmentActivity& est, const SegmentActivity& ref);

/// ER = (sum S + sum D + sum I) / sum N; F = 2 TP / (2 TP + FN + FP), with the
/// zero-denominator F defined as 1 (nothing predicted, nothing to predict).
/// sum N = 0 raises, as ER is then undefined.
std::pair<double, double> compute_er_f(const SegmentCounts& counts);

/// Great-circle angle between two directions, degrees in [0, 180].
double angular_distance_deg(const Doa& a, const Doa& b);

/// Minimum total cost of matching min(rows, cols) disjoint (row, col) pairs.
/// cost is row-major rows x cols with non-negative entries.
double assignment_cost(const std::vector<double>& cost, int rows, int cols);

/// Mean angular error of optimally matched estimate/reference pairs, with the
/// per-frame match over min(|est|, |ref|) pairs and the mean taken over the
/// total number of estimates. Empty when no frame has an estimate.
std::optional<double> compute_doae(const FrameDoas& est, const FrameDoas& ref);

/// Fraction of frames whose estimated DOA count equals the reference count.
double compute_fr(const FrameDoas& est, const FrameDoas& ref);

/// Full report over one recording.
MetricsReport evaluate(const SegmentActivity& est_segments, const SegmentActivity& ref_segments,
                       const FrameDoas& est_doas, const FrameDoas& ref_doas);

}  // namespace seldpair
