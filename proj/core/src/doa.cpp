#include "seldpair/doa.hpp"

#include <cmath>

namespace seldpair {

int scan_doa(std::span<const double> tdoa_frame, const CalibrationTable& table,
             const KernelConfig& kernel) {
    kernel.validate();
    const int P = table.num_pairs();
    if (static_cast<int>(tdoa_frame.size()) != P)
        throw ValidationError("scan_doa: TDOA vector length != pair count");
    if (table.grid.size() < 1) throw ValidationError("scan_doa: empty grid");

    const double inv_two_sigma_sq = 1.0 / (2.0 * kernel.sigma * kernel.sigma);
    int best_q = 0;
    double best_score = -1.0;
    for (int q = 0; q < table.grid.size(); ++q) {
        double score = 0.0;
        for (int p = 0; p < P; ++p) {
            const double d = tdoa_frame[p] - table.at(q, p);
            score += std::exp(-d * d * inv_two_sigma_sq);
        }
        if (score > best_score) {
            best_score = score;
            best_q = q;
        }
    }
    return best_q;
}

DoaOutput estimate_doas(const TdoaTensor& tensor, const FrameActivity& activity,
                        const CalibrationTable& table, const KernelConfig& kernel) {
    tensor.validate();
    if (activity.num_frames != tensor.num_frames || activity.num_classes != tensor.num_classes)
        throw ValidationError("estimate_doas: activity shape != tensor shape");
    if (tensor.num_pairs != table.num_pairs())
        throw ValidationError("estimate_doas: tensor pair count != calibration pair count");

    DoaOutput out;
    out.num_frames = tensor.num_frames;
    std::vector<double> row(tensor.num_pairs);
    for (int t = 0; t < tensor.num_frames; ++t) {
        for (int c = 0; c < tensor.num_classes; ++c) {
            if (!activity.at(t, c)) continue;
            if (!tensor.valid(t, c)) {
                ++out.skipped_missing_tdoa;
                continue;
            }
            for (int p = 0; p < tensor.num_pairs; ++p) row[p] = tensor.at(t, p, c);
            const int q = scan_doa(row, table, kernel);
            const auto [az, el] = table.grid.lookup(q);
            out.entries.push_back({t, c, q, az, el});
        }
    }
    return out;
}

FrameDoas to_frame_doas(const DoaOutput& output) {
    FrameDoas sets(output.num_frames);
    for (const auto& e : output.entries) {
        if (e.frame < 0 || e.frame >= output.num_frames)
            throw ValidationError("to_frame_doas: entry frame out of range");
        sets[e.frame].push_back({e.azimuth_deg, e.elevation_deg});
    }
    return sets;
}

}  // namespace seldpair
