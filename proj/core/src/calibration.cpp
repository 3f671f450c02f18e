#include "seldpair/calibration.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace seldpair {

namespace {

constexpr double kAzimuthHalfSpan = 540.0;  // tripled azimuth range, degrees

struct FitPoint {
    double x;  // normalized azimuth
    double y;  // observed TDOA, samples
    double w;  // frame-count weight
};

std::vector<double> weighted_polyfit(const std::vector<FitPoint>& pts, int order) {
    const int rows = static_cast<int>(pts.size());
    const int cols = order + 1;
    Eigen::MatrixXd design(rows, cols);
    Eigen::VectorXd rhs(rows);
    for (int r = 0; r < rows; ++r) {
        const double sw = std::sqrt(pts[r].w);
        double xp = 1.0;
        for (int c = 0; c < cols; ++c) {
            design(r, c) = sw * xp;
            xp *= pts[r].x;
        }
        rhs(r) = sw * pts[r].y;
    }
    // Column scaling keeps the high-order Vandermonde solvable.
    Eigen::VectorXd scale(cols);
    for (int c = 0; c < cols; ++c) {
        const double n = design.col(c).norm();
        scale(c) = n > 0 ? n : 1.0;
        design.col(c) /= scale(c);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < cols) throw DataError("fit_calibration: rank-deficient fit");
    Eigen::VectorXd sol = qr.solve(rhs);
    std::vector<double> coeffs(cols);
    for (int c = 0; c < cols; ++c) coeffs[c] = sol(c) / scale(c);
    return coeffs;
}

double eval_poly(const std::vector<double>& coeffs, double x) {
    double acc = 0.0;
    for (size_t c = coeffs.size(); c-- > 0;) acc = acc * x + coeffs[c];
    return acc;
}

double median_abs(std::vector<double> v) {
    for (auto& x : v) x = std::abs(x);
    const size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
        double lo = *std::max_element(v.begin(), v.begin() + mid);
        m = 0.5 * (m + lo);
    }
    return m;
}

double rms(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc / static_cast<double>(v.size()));
}

}  // namespace

double evaluate_fit(const std::vector<double>& coeffs, double azimuth_deg) {
    return eval_poly(coeffs, azimuth_deg / kAzimuthHalfSpan);
}

CalibrationObservations collect_observations(const std::vector<AnnotatedSpectrogram>& recordings,
                                             const DoaGrid& grid, const TdoaLattice& lattice) {
    CalibrationObservations obs;
    obs.grid = grid;
    obs.tau_max = lattice.tau_max;
    obs.num_lattice = lattice.num_points;

    int num_mics = 0;
    for (const auto& rec : recordings) {
        if (!rec.spec) throw ValidationError("collect_observations: null spectrogram");
        if (static_cast<int>(rec.frame_doa.size()) != rec.spec->num_frames)
            throw ValidationError("collect_observations: annotation length != frame count");
        if (num_mics == 0)
            num_mics = rec.spec->num_mics;
        else if (rec.spec->num_mics != num_mics)
            throw ValidationError("collect_observations: recordings disagree on channel count");
        for (int q : rec.frame_doa)
            if (q < -1 || q >= grid.size())
                throw ValidationError("collect_observations: annotation DOA not on grid");
    }

    const int P = num_mics >= 2 ? num_pairs(num_mics) : 0;
    obs.num_pairs = P;
    obs.tdoa.assign(static_cast<size_t>(grid.size()) * std::max(P, 1), 0.0);
    obs.weight.assign(obs.tdoa.size(), 0.0);
    if (recordings.empty() || P == 0) {
        obs.num_pairs = P;
        return obs;
    }

    const int num_bins = recordings.front().spec->config.num_bins();
    const int fft_size = recordings.front().spec->config.frame_size;
    const int bin_lo = recordings.front().spec->config.bin_lo;
    for (const auto& rec : recordings)
        if (rec.spec->config.num_bins() != num_bins || rec.spec->config.frame_size != fft_size ||
            rec.spec->config.bin_lo != bin_lo)
            throw ValidationError("collect_observations: recordings disagree on STFT layout");

    const auto pairs = enumerate_pairs(num_mics);
    std::vector<std::complex<double>> acc(static_cast<size_t>(grid.size()) * P * num_bins,
                                          {0.0, 0.0});
    std::vector<double> counts(grid.size(), 0.0);

    for (const auto& rec : recordings) {
        for (int t = 0; t < rec.spec->num_frames; ++t) {
            const int q = rec.frame_doa[t];
            if (q < 0) continue;
            counts[q] += 1.0;
            for (int p = 0; p < P; ++p) {
                const auto [i, j] = pairs[p];
                const std::complex<double>* xi = &rec.spec->at(i, t, 0);
                const std::complex<double>* xj = &rec.spec->at(j, t, 0);
                std::complex<double>* dst = &acc[(static_cast<size_t>(q) * P + p) * num_bins];
                for (int k = 0; k < num_bins; ++k) dst[k] += xi[k] * std::conj(xj[k]);
            }
        }
    }

    GccPhatPlan plan(lattice, fft_size, bin_lo, bin_lo + num_bins);
    for (int q = 0; q < grid.size(); ++q) {
        if (counts[q] <= 0) continue;
        for (int p = 0; p < P; ++p) {
            std::span<const std::complex<double>> values{
                &acc[(static_cast<size_t>(q) * P + p) * num_bins], static_cast<size_t>(num_bins)};
            const std::vector<double> gcc = plan.correlate(values);
            obs.tdoa_at(q, p) = estimate_tdoa(gcc, lattice);
            obs.weight[static_cast<size_t>(q) * P + p] = counts[q];
        }
    }
    return obs;
}

CalibrationTable fit_calibration(const CalibrationObservations& obs, const DoaGrid& grid,
                                 int order) {
    if (order < 1) throw ValidationError("fit_calibration: order must be >= 1");
    if (obs.num_pairs < 1) throw ValidationError("fit_calibration: observations carry no pairs");

    // P = M(M-1)/2 inverted to recover M.
    int num_mics = 2;
    while (num_mics * (num_mics - 1) / 2 < obs.num_pairs) ++num_mics;
    if (num_mics * (num_mics - 1) / 2 != obs.num_pairs)
        throw ValidationError("fit_calibration: pair count is not M(M-1)/2");

    CalibrationTable table;
    table.grid = grid;
    table.num_mics = num_mics;
    table.tau_max = obs.tau_max;
    table.num_lattice = obs.num_lattice;
    table.provenance = Provenance::measured;
    table.tdoa.assign(static_cast<size_t>(grid.size()) * obs.num_pairs, 0.0);

    const int min_azimuths = (order + 1 + 2) / 3;  // >= order+1 points after tripling

    for (int p = 0; p < obs.num_pairs; ++p) {
        for (int e = 0; e < grid.elevation_count; ++e) {
            std::vector<FitPoint> base;
            std::string missing;
            for (int a = 0; a < grid.azimuth_count; ++a) {
                const int q = grid.index(a, e);
                const double w = obs.weight_at(q, p);
                const double az = grid.azimuth_start + grid.azimuth_step * a;
                if (w <= 0) {
                    char buf[32];
                    std::snprintf(buf, sizeof buf, "%g", az);
                    if (!missing.empty()) missing += ", ";
                    missing += buf;
                    continue;
                }
                base.push_back({az, obs.tdoa_at(q, p), w});
            }
            if (static_cast<int>(base.size()) < min_azimuths)
                throw ValidationError("fit_calibration: insufficient observations for pair " +
                                      std::to_string(p) + ", elevation row " + std::to_string(e) +
                                      " (" + std::to_string(base.size()) + " azimuths, need " +
                                      std::to_string(min_azimuths) +
                                      "; missing azimuths: " + missing + ")");

            // Tile the 360-degree-periodic observations over three periods so
            // the fit has no discontinuity at the +/-180 seam.
            std::vector<FitPoint> pts;
            pts.reserve(base.size() * 3);
            for (int rep = -1; rep <= 1; ++rep)
                for (const auto& b : base)
                    pts.push_back({(b.x + 360.0 * rep) / kAzimuthHalfSpan, b.y, b.w});

            FitRow row;
            row.pair = p;
            row.elevation_index = e;
            row.coeffs_first = weighted_polyfit(pts, order);

            std::vector<double> resid(pts.size());
            for (size_t i = 0; i < pts.size(); ++i)
                resid[i] = eval_poly(row.coeffs_first, pts[i].x) - pts[i].y;
            row.rms_first = rms(resid);

            const double cutoff = std::max(3.0 * median_abs(resid), 0.5);
            // The three tiled copies of an azimuth are one measurement, so a
            // copy past the cutoff condemns all three. Otherwise an outlier
            // can survive through an outer tile, where the polynomial edge
            // has enough freedom to chase it.
            const size_t nb = base.size();
            std::vector<char> bad(nb, 0);
            for (size_t i = 0; i < pts.size(); ++i)
                if (std::abs(resid[i]) > cutoff) bad[i % nb] = 1;
            std::vector<FitPoint> inliers;
            inliers.reserve(pts.size());
            for (size_t i = 0; i < pts.size(); ++i)
                if (!bad[i % nb]) inliers.push_back(pts[i]);
            row.outliers_removed = static_cast<int>(pts.size() - inliers.size());
            row.points_used = static_cast<int>(inliers.size());
            if (static_cast<int>(inliers.size()) < order + 1)
                throw DataError("fit_calibration: outlier removal left too few points for pair " +
                                std::to_string(p) + ", elevation row " + std::to_string(e));

            row.coeffs_second = weighted_polyfit(inliers, order);
            std::vector<double> resid2(inliers.size());
            for (size_t i = 0; i < inliers.size(); ++i)
                resid2[i] = eval_poly(row.coeffs_second, inliers[i].x) - inliers[i].y;
            row.rms_second = rms(resid2);

            for (int a = 0; a < grid.azimuth_count; ++a) {
                const double az = grid.azimuth_start + grid.azimuth_step * a;
                double v = eval_poly(row.coeffs_second, az / kAzimuthHalfSpan);
                v = std::clamp(v, -table.tau_max, table.tau_max);
                table.tdoa[static_cast<size_t>(grid.index(a, e)) * obs.num_pairs + p] = v;
            }
            table.fit_rows.push_back(std::move(row));
        }
    }
    return table;
}

CalibrationTable analytic_calibration(const ArrayGeometry& geometry, const DoaGrid& grid,
                                      double sample_rate_hz, double tau_max) {
    geometry.validate();
    CalibrationTable table;
    table.grid = grid;
    table.num_mics = geometry.num_mics();
    table.tau_max = tau_max;
    table.provenance = Provenance::analytic;
    table.tdoa.resize(static_cast<size_t>(grid.size()) * table.num_pairs());
    for (int q = 0; q < grid.size(); ++q) {
        const auto [az, el] = grid.lookup(q);
        const std::vector<double> tau = predict_freefield(geometry, az, el, sample_rate_hz);
        for (int p = 0; p < table.num_pairs(); ++p) {
            if (std::abs(tau[p]) > tau_max)
                throw ValidationError("analytic_calibration: geometry TDOA exceeds tau_max");
            table.tdoa[static_cast<size_t>(q) * table.num_pairs() + p] = tau[p];
        }
    }
    return table;
}

std::vector<double> lookup(const CalibrationTable& table, int q) {
    if (q < 0 || q >= table.grid.size()) throw ValidationError("lookup: DOA index out of range");
    const int P = table.num_pairs();
    return {table.tdoa.begin() + static_cast<size_t>(q) * P,
            table.tdoa.begin() + static_cast<size_t>(q + 1) * P};
}

bool rows_pairwise_distinct(const CalibrationTable& table, double tolerance) {
    const int P = table.num_pairs();
    for (int a = 0; a < table.grid.size(); ++a) {
        for (int b = a + 1; b < table.grid.size(); ++b) {
            double max_diff = 0.0;
            for (int p = 0; p < P; ++p)
                max_diff = std::max(max_diff, std::abs(table.at(a, p) - table.at(b, p)));
            if (max_diff <= tolerance) return false;
        }
    }
    return true;
}

}  // namespace seldpair
