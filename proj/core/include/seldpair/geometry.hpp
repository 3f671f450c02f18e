#pragma once

#include <array>
#include <vector>

#include "seldpair/errors.hpp"

namespace seldpair {

/// Microphone positions in meters, array-centered coordinates.
struct ArrayGeometry {
    std::vector<std::array<double, 3>> mic_positions;
    double speed_of_sound = 343.0;

    int num_mics() const { return static_cast<int>(mic_positions.size()); }
    void validate() const;

    /// Largest inter-microphone TDOA magnitude (samples) over all pairs
    /// and directions; used to check geometry against a lattice's tau_max.
    double max_pair_tdoa(double sample_rate_hz) const;
};

/// Regular tetrahedron of the given circumradius, centered at the origin.
ArrayGeometry regular_tetrahedron(double circumradius_m);

/// Far-field TDOA prediction for every pair in canonical order, in samples.
/// Positive tau_(i,j) means microphone j receives the wavefront after
/// microphone i, matching the sign the GCC-PHAT path estimates.
std::vector<double> predict_freefield(const ArrayGeometry& geometry, double azimuth_deg,
                                      double elevation_deg, double sample_rate_hz);

}  // namespace seldpair
