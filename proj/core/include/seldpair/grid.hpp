#pragma once

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "seldpair/errors.hpp"

namespace seldpair {

/// One direction of arrival in degrees.
struct Doa {
    double azimuth_deg = 0.0;
    double elevation_deg = 0.0;
};

/// DOA sets per frame, for localization metrics.
using FrameDoas = std::vector<std::vector<Doa>>;

/// Discrete direction-of-arrival search grid: 36 azimuths x 9 elevations,
/// indexed q = elevation_index * azimuth_count + azimuth_index.
struct DoaGrid {
    double azimuth_start = -180.0;
    double azimuth_step = 10.0;
    int azimuth_count = 36;
    double elevation_start = -40.0;
    double elevation_step = 10.0;
    int elevation_count = 9;

    int size() const { return azimuth_count * elevation_count; }

    std::pair<double, double> lookup(int q) const {
        if (q < 0 || q >= size()) throw ValidationError("DoaGrid: index out of range");
        const int el = q / azimuth_count;
        const int az = q % azimuth_count;
        return {azimuth_start + azimuth_step * az, elevation_start + elevation_step * el};
    }

    int index(int az_idx, int el_idx) const {
        if (az_idx < 0 || az_idx >= azimuth_count || el_idx < 0 || el_idx >= elevation_count)
            throw ValidationError("DoaGrid: subscript out of range");
        return el_idx * azimuth_count + az_idx;
    }

    /// Grid index of an (azimuth, elevation) pair, or nullopt when the
    /// angles do not sit on the grid (1e-6 degree tolerance).
    std::optional<int> from_angles(double azimuth_deg, double elevation_deg) const {
        const double ax = (azimuth_deg - azimuth_start) / azimuth_step;
        const double ex = (elevation_deg - elevation_start) / elevation_step;
        const long az = std::lround(ax), el = std::lround(ex);
        if (std::abs(ax - az) > 1e-6 || std::abs(ex - el) > 1e-6) return std::nullopt;
        if (az < 0 || az >= azimuth_count || el < 0 || el >= elevation_count) return std::nullopt;
        return index(static_cast<int>(az), static_cast<int>(el));
    }
};

}  // namespace seldpair
