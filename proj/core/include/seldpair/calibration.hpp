#pragma once

#include <optional>
#include <string>
#include <vector>

#include "seldpair/dsp.hpp"
#include "seldpair/geometry.hpp"
#include "seldpair/grid.hpp"

namespace seldpair {

/// Raw per-(pair, DOA) TDOA estimates gathered from annotated recordings.
/// weight == 0 marks a (pair, DOA) cell with no single-source frames.
struct CalibrationObservations {
    DoaGrid grid;
    int num_pairs = 0;
    double tau_max = 0.0;
    int num_lattice = 0;
    std::vector<double> tdoa;    // [q * num_pairs + p]
    std::vector<double> weight;  // frame counts, same layout

    double& tdoa_at(int q, int p) { return tdoa[static_cast<size_t>(q) * num_pairs + p]; }
    double tdoa_at(int q, int p) const { return tdoa[static_cast<size_t>(q) * num_pairs + p]; }
    double weight_at(int q, int p) const { return weight[static_cast<size_t>(q) * num_pairs + p]; }
};

enum class Provenance { measured, analytic };

/// Per-(pair, elevation) fit diagnostics, kept for audit and reporting.
struct FitRow {
    int pair = 0;
    int elevation_index = 0;
    std::vector<double> coeffs_first;   // over normalized azimuth in [-1, 1]
    std::vector<double> coeffs_second;
    double rms_first = 0.0;   // residual RMS of the first fit, all points
    double rms_second = 0.0;  // residual RMS of the second fit, inliers only
    int points_used = 0;
    int outliers_removed = 0;
};

/// TDOA expected at every grid DOA for every pair, in samples.
struct CalibrationTable {
    DoaGrid grid;
    int num_mics = 0;
    double tau_max = 20.0;
    int num_lattice = 0;  // lag lattice size behind measured tables; 0 for analytic
    Provenance provenance = Provenance::analytic;
    std::vector<double> tdoa;      // [q * P + p], |value| <= tau_max
    std::vector<FitRow> fit_rows;  // empty for analytic tables

    int num_pairs() const { return num_mics * (num_mics - 1) / 2; }
    double at(int q, int p) const { return tdoa[static_cast<size_t>(q) * num_pairs() + p]; }
};

/// One calibration recording: spectrogram plus a per-frame DOA annotation.
/// frame_doa[t] is a grid index, or -1 when the frame has no single active
/// source and must be excluded.
struct AnnotatedSpectrogram {
    const Spectrogram* spec = nullptr;
    std::vector<int> frame_doa;
};

/// Accumulates cross-spectra per (pair, DOA) over all single-source frames,
/// applies GCC-PHAT, and keeps the lattice argmax with weight |T_q|.
CalibrationObservations collect_observations(const std::vector<AnnotatedSpectrogram>& recordings,
                                             const DoaGrid& grid, const TdoaLattice& lattice);

/// Degree-`order` weighted polynomial fit of TDOA against azimuth for each
/// (pair, elevation) row. Observations are tiled over three azimuth periods
/// before fitting, outliers rejected against the first fit, and the table
/// filled from the second fit clamped to [-tau_max, tau_max].
CalibrationTable fit_calibration(const CalibrationObservations& obs, const DoaGrid& grid,
                                 int order = 27);

/// Table built directly from the free-field predictor; no fitting involved.
CalibrationTable analytic_calibration(const ArrayGeometry& geometry, const DoaGrid& grid,
                                      double sample_rate_hz, double tau_max);

/// Per-pair TDOA vector for grid index q, canonical pair order.
std::vector<double> lookup(const CalibrationTable& table, int q);

/// Evaluates a fitted polynomial (coefficients over azimuth/540 in [-1,1]).
double evaluate_fit(const std::vector<double>& coeffs, double azimuth_deg);

/// True when no two grid rows carry the same per-pair TDOA vector; the
/// exact-match optimality of the DOA scan relies on it.
bool rows_pairwise_distinct(const CalibrationTable& table, double tolerance = 1e-9);

}  // namespace seldpair
