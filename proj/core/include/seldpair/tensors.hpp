#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "seldpair/errors.hpp"

namespace seldpair {

/// Per-frame, per-pair, per-class event activity scores in [0, 1].
/// Layout is row-major [frame][pair][class].
struct ScoreTensor {
    int num_frames = 0;
    int num_pairs = 0;
    int num_classes = 0;
    std::vector<double> data;

    double& at(int t, int p, int c) {
        return data[(static_cast<size_t>(t) * num_pairs + p) * num_classes + c];
    }
    double at(int t, int p, int c) const {
        return data[(static_cast<size_t>(t) * num_pairs + p) * num_classes + c];
    }

    void resize(int frames, int pairs, int classes, double fill = 0.0) {
        num_frames = frames;
        num_pairs = pairs;
        num_classes = classes;
        data.assign(static_cast<size_t>(frames) * pairs * classes, fill);
    }

    void validate() const;
};

/// Per-frame, per-pair, per-class TDOA estimates in samples; same layout as
/// ScoreTensor. NaN marks a (frame, class) cell with no estimate, and the mark
/// must agree across all pairs of that cell.
struct TdoaTensor {
    int num_frames = 0;
    int num_pairs = 0;
    int num_classes = 0;
    double tau_max = 0.0;
    std::vector<double> data;

    double& at(int t, int p, int c) {
        return data[(static_cast<size_t>(t) * num_pairs + p) * num_classes + c];
    }
    double at(int t, int p, int c) const {
        return data[(static_cast<size_t>(t) * num_pairs + p) * num_classes + c];
    }

    bool valid(int t, int c) const { return !std::isnan(at(t, 0, c)); }

    void set_invalid(int t, int c) {
        for (int p = 0; p < num_pairs; ++p) at(t, p, c) = std::numeric_limits<double>::quiet_NaN();
    }

    void resize(int frames, int pairs, int classes) {
        num_frames = frames;
        num_pairs = pairs;
        num_classes = classes;
        data.assign(static_cast<size_t>(frames) * pairs * classes,
                    std::numeric_limits<double>::quiet_NaN());
    }

    void validate() const;
};

/// Checks the two tensors describe the same frames, pairs, and classes.
void check_same_shape(const ScoreTensor& scores, const TdoaTensor& tdoas);

}  // namespace seldpair
