#pragma once

#include <span>
#include <vector>

#include "seldpair/calibration.hpp"
#include "seldpair/sed.hpp"
#include "seldpair/tensors.hpp"

namespace seldpair {

struct KernelConfig {
    double sigma = 2.0;  // samples

    void validate() const {
        if (!(sigma > 0)) throw ValidationError("KernelConfig: sigma must be positive");
    }
};

/// Direction estimates for active (frame, class) cells.
struct DoaOutput {
    struct Entry {
        int frame = 0;
        int klass = 0;
        int grid_index = 0;
        double azimuth_deg = 0.0;
        double elevation_deg = 0.0;
    };

    int num_frames = 0;
    std::vector<Entry> entries;  // sorted by (frame, class)
    long skipped_missing_tdoa = 0;  // active cells without a TDOA estimate
};

/// Picks the grid direction whose calibration row best explains the observed
/// per-pair TDOAs: argmax_q sum_p exp(-(tdoa[p] - table[q][p])^2 / (2 sigma^2)).
/// Ties resolve to the smallest q.
int scan_doa(std::span<const double> tdoa_frame, const CalibrationTable& table,
             const KernelConfig& kernel);

/// Runs scan_doa for every active (frame, class) cell that carries a TDOA
/// estimate; active cells without one are skipped and counted.
DoaOutput estimate_doas(const TdoaTensor& tensor, const FrameActivity& activity,
                        const CalibrationTable& table, const KernelConfig& kernel);

/// Per-frame DOA sets (class identity dropped), as the localization metrics
/// consume them.
FrameDoas to_frame_doas(const DoaOutput& output);

}  // namespace seldpair
