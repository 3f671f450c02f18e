#include "seldpair/detector.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

namespace seldpair {

void DetectorConfig::validate() const {
    if (!(noise_floor_percentile > 0 && noise_floor_percentile < 100))
        throw ValidationError("DetectorConfig: noise_floor_percentile outside (0,100)");
    if (smoothing_frames < 1)
        throw ValidationError("DetectorConfig: smoothing_frames must be >= 1");
    if (!single_class_mode && num_classes < 1)
        throw ValidationError("DetectorConfig: num_classes must be >= 1");
}

namespace {

double percentile(std::vector<double> v, double pct) {
    std::sort(v.begin(), v.end());
    const double rank = (static_cast<double>(v.size()) - 1.0) * pct / 100.0;
    const size_t lo = static_cast<size_t>(rank);
    const size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = rank - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}

std::vector<double> moving_average(const std::vector<double>& v, int window) {
    const int n = static_cast<int>(v.size());
    std::vector<double> out(n);
    const int half = (window - 1) / 2;
    for (int t = 0; t < n; ++t) {
        const int lo = std::max(0, t - half);
        const int hi = std::min(n, t - half + window);
        double acc = 0.0;
        for (int u = lo; u < hi; ++u) acc += v[u];
        out[t] = acc / static_cast<double>(hi - lo);
    }
    return out;
}

}  // namespace

DetectorOutput detect(const Spectrogram& spec, const TdoaLattice& lattice,
                      const DetectorConfig& config) {
    config.validate();
    if (spec.num_mics < 2) throw ValidationError("detect: need at least two channels");

    const int P = num_pairs(spec.num_mics);
    const int T = spec.num_frames;
    const int C = config.single_class_mode ? 1 : config.num_classes;
    const int K = spec.config.num_bins();
    const auto pairs = enumerate_pairs(spec.num_mics);

    DetectorOutput out;
    out.scores.resize(T, P, C, 0.0);
    out.tdoas.resize(T, P, C);
    out.tdoas.tau_max = lattice.tau_max;
    if (T == 0) return out;

    GccPhatPlan plan(lattice, spec.config.frame_size, spec.config.bin_lo, spec.config.bin_hi);
    std::vector<std::complex<double>> cross(K);
    std::vector<double> band_energy(T);
    std::vector<double> tdoa(T);

    for (int p = 0; p < P; ++p) {
        const auto [i, j] = pairs[p];
        for (int t = 0; t < T; ++t) {
            const std::complex<double>* xi = &spec.at(i, t, 0);
            const std::complex<double>* xj = &spec.at(j, t, 0);
            double energy = 0.0;
            for (int k = 0; k < K; ++k) {
                cross[k] = xi[k] * std::conj(xj[k]);
                energy += std::abs(cross[k]);
            }
            band_energy[t] = std::log(energy + 1e-20);
            tdoa[t] = estimate_tdoa(plan.correlate(cross), lattice);
        }

        const std::vector<double> smoothed = moving_average(band_energy, config.smoothing_frames);
        const double floor = percentile(smoothed, config.noise_floor_percentile);
        const double peak = *std::max_element(smoothed.begin(), smoothed.end());
        const double span = peak - floor;

        for (int t = 0; t < T; ++t) {
            const double score =
                span > 0 ? std::clamp((smoothed[t] - floor) / span, 0.0, 1.0) : 0.0;
            for (int c = 0; c < C; ++c) {
                out.scores.at(t, p, c) = score;
                out.tdoas.at(t, p, c) = tdoa[t];
            }
        }
    }
    return out;
}

}  // namespace seldpair
