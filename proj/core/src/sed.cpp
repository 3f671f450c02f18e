#include "seldpair/sed.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace seldpair {

void ThresholdSet::validate() const {
    if (epsilon.empty()) throw ValidationError("ThresholdSet: no classes");
    for (double e : epsilon)
        if (!(e >= 0.0 && e <= 1.0))
            throw ValidationError("ThresholdSet: threshold outside [0,1]");
}

FrameScores fuse_scores(const ScoreTensor& tensor) {
    tensor.validate();
    FrameScores out;
    out.num_frames = tensor.num_frames;
    out.num_classes = tensor.num_classes;
    out.values.assign(static_cast<size_t>(out.num_frames) * out.num_classes, 0.0);
    const double inv = 1.0 / tensor.num_pairs;
    for (int t = 0; t < tensor.num_frames; ++t)
        for (int c = 0; c < tensor.num_classes; ++c) {
            double acc = 0.0;
            for (int p = 0; p < tensor.num_pairs; ++p) acc += tensor.at(t, p, c);
            out.at(t, c) = acc * inv;
        }
    return out;
}

FrameActivity threshold_scores(const FrameScores& fused, const ThresholdSet& thresholds) {
    thresholds.validate();
    if (thresholds.num_classes() != fused.num_classes)
        throw ValidationError("threshold_scores: class count mismatch");
    FrameActivity out;
    out.resize(fused.num_frames, fused.num_classes);
    for (int t = 0; t < fused.num_frames; ++t)
        for (int c = 0; c < fused.num_classes; ++c)
            out.at(t, c) = fused.at(t, c) >= thresholds.epsilon[c] ? 1 : 0;
    return out;
}

FrameActivity postfilter(const FrameActivity& activity, int min_frames) {
    if (min_frames < 1) throw ValidationError("postfilter: min_frames must be >= 1");
    FrameActivity out = activity;
    for (int c = 0; c < activity.num_classes; ++c) {
        int t = 0;
        while (t < activity.num_frames) {
            if (!activity.at(t, c)) {
                ++t;
                continue;
            }
            int end = t;
            while (end < activity.num_frames && activity.at(end, c)) ++end;
            if (end - t < min_frames)
                for (int u = t; u < end; ++u) out.at(u, c) = 0;
            t = end;
        }
    }
    return out;
}

SegmentActivity to_segments(const FrameActivity& activity, int segment_frames) {
    if (segment_frames < 1) throw ValidationError("to_segments: segment_frames must be >= 1");
    SegmentActivity out;
    out.segment_frames = segment_frames;
    out.resize((activity.num_frames + segment_frames - 1) / segment_frames, activity.num_classes);
    for (int t = 0; t < activity.num_frames; ++t) {
        const int l = t / segment_frames;
        for (int c = 0; c < activity.num_classes; ++c)
            if (activity.at(t, c)) out.at(l, c) = 1;
    }
    return out;
}

EventTimeline build_timeline(const ScoreTensor& tensor, const ThresholdSet& thresholds,
                             int min_frames, int segment_frames) {
    EventTimeline tl;
    tl.fused = fuse_scores(tensor);
    tl.activity = postfilter(threshold_scores(tl.fused, thresholds), min_frames);
    tl.segments = to_segments(tl.activity, segment_frames);
    return tl;
}

namespace {

// Pooled class-restricted segment F-score; empty-vs-empty counts as perfect.
double class_f_score(const std::vector<const SegmentActivity*>& est,
                     const std::vector<const SegmentActivity*>& ref, int c) {
    long tp = 0, fn = 0, fp = 0;
    for (size_t i = 0; i < est.size(); ++i) {
        for (int l = 0; l < ref[i]->num_segments; ++l) {
            const bool e = est[i]->at(l, c) != 0;
            const bool r = ref[i]->at(l, c) != 0;
            tp += e && r;
            fn += !e && r;
            fp += e && !r;
        }
    }
    const long denom = 2 * tp + fn + fp;
    return denom == 0 ? 1.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

}  // namespace

ThresholdSet tune_thresholds(const std::vector<TuningExample>& validation, int min_frames,
                             double grid_step) {
    if (validation.empty()) throw ValidationError("tune_thresholds: empty validation set");
    if (!(grid_step > 0.0 && grid_step <= 1.0))
        throw ValidationError("tune_thresholds: grid_step outside (0,1]");

    const int num_classes = validation.front().scores.num_classes;
    std::vector<FrameScores> fused;
    std::vector<const SegmentActivity*> refs;
    fused.reserve(validation.size());
    for (const auto& ex : validation) {
        ex.scores.validate();
        if (ex.scores.num_classes != num_classes)
            throw ValidationError("tune_thresholds: examples disagree on class count");
        if (ex.reference.num_classes != num_classes)
            throw ValidationError("tune_thresholds: reference class count mismatch");
        if (ex.reference.segment_frames < 1)
            throw ValidationError("tune_thresholds: reference lacks segment length");
        const int expect = (ex.scores.num_frames + ex.reference.segment_frames - 1) /
                           ex.reference.segment_frames;
        if (ex.reference.num_segments != expect)
            throw ValidationError("tune_thresholds: reference segment count mismatch");
        fused.push_back(fuse_scores(ex.scores));
        refs.push_back(&ex.reference);
    }

    const int steps = static_cast<int>(std::llround(1.0 / grid_step));
    ThresholdSet best;
    best.epsilon.assign(num_classes, 0.0);
    for (int c = 0; c < num_classes; ++c) {
        double best_f = -1.0;
        for (int s = 0; s <= steps; ++s) {
            const double eps = std::min(1.0, s * grid_step);
            ThresholdSet cand;
            cand.epsilon.assign(num_classes, eps);
            std::vector<SegmentActivity> est;
            std::vector<const SegmentActivity*> est_ptrs;
            est.reserve(validation.size());
            for (size_t i = 0; i < validation.size(); ++i) {
                est.push_back(to_segments(postfilter(threshold_scores(fused[i], cand), min_frames),
                                          refs[i]->segment_frames));
                est_ptrs.push_back(&est.back());
            }
            const double f = class_f_score(est_ptrs, refs, c);
            if (f > best_f) {
                best_f = f;
                best.epsilon[c] = eps;
            }
        }
    }
    return best;
}

}  // namespace seldpair
