#include "seldpair/geometry.hpp"

#include <cmath>
#include <numbers>

#include "seldpair/pairs.hpp"

namespace seldpair {

void ArrayGeometry::validate() const {
    if (num_mics() < 2) throw ValidationError("ArrayGeometry: need at least 2 microphones");
    if (speed_of_sound <= 0) throw ValidationError("ArrayGeometry: speed_of_sound must be positive");
    for (int i = 0; i < num_mics(); ++i)
        for (int j = i + 1; j < num_mics(); ++j) {
            double d2 = 0;
            for (int a = 0; a < 3; ++a) {
                const double d = mic_positions[i][a] - mic_positions[j][a];
                d2 += d * d;
            }
            if (d2 < 1e-18) throw ValidationError("ArrayGeometry: coincident microphones");
        }
}

double ArrayGeometry::max_pair_tdoa(double sample_rate_hz) const {
    double max_dist = 0.0;
    for (int i = 0; i < num_mics(); ++i)
        for (int j = i + 1; j < num_mics(); ++j) {
            double d2 = 0;
            for (int a = 0; a < 3; ++a) {
                const double d = mic_positions[i][a] - mic_positions[j][a];
                d2 += d * d;
            }
            max_dist = std::max(max_dist, std::sqrt(d2));
        }
    return sample_rate_hz * max_dist / speed_of_sound;
}

ArrayGeometry regular_tetrahedron(double circumradius_m) {
    const double s = circumradius_m / std::sqrt(3.0);
    ArrayGeometry g;
    g.mic_positions = {{s, s, s}, {s, -s, -s}, {-s, s, -s}, {-s, -s, s}};
    return g;
}

std::vector<double> predict_freefield(const ArrayGeometry& geometry, double azimuth_deg,
                                      double elevation_deg, double sample_rate_hz) {
    geometry.validate();
    const double az = azimuth_deg * std::numbers::pi / 180.0;
    const double el = elevation_deg * std::numbers::pi / 180.0;
    const std::array<double, 3> u = {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az),
                                     std::sin(el)};
    std::vector<double> out;
    out.reserve(num_pairs(geometry.num_mics()));
    for (const auto& [i, j] : enumerate_pairs(geometry.num_mics())) {
        double dot = 0;
        for (int a = 0; a < 3; ++a)
            dot += u[a] * (geometry.mic_positions[i][a] - geometry.mic_positions[j][a]);
        out.push_back(sample_rate_hz * dot / geometry.speed_of_sound);
    }
    return out;
}

}  // namespace seldpair
