#include "seldpair/dsp.hpp"

#include <fftw3.h>

#include "fftw_util.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

namespace seldpair {

void StftConfig::validate() const {
    if (sample_rate_hz <= 0) throw ValidationError("StftConfig: sample_rate_hz must be positive");
    if (frame_size <= 0) throw ValidationError("StftConfig: frame_size must be positive");
    if (hop_size <= 0 || hop_size > frame_size)
        throw ValidationError("StftConfig: need 0 < hop_size <= frame_size");
    if (bin_lo < 0) throw ValidationError("StftConfig: bin_lo must be >= 0");
    if (bin_lo >= bin_hi) throw ValidationError("StftConfig: need bin_lo < bin_hi");
    if (bin_hi > frame_size / 2 + 1)
        throw ValidationError("StftConfig: bin_hi exceeds frame_size/2 + 1");
}

int stft_frame_count(size_t len, const StftConfig& config) {
    if (len < static_cast<size_t>(config.frame_size)) return 0;
    return static_cast<int>((len - config.frame_size) / config.hop_size) + 1;
}

namespace {

struct RealFftPlan {
    fftw_plan plan = nullptr;
    double* in = nullptr;
    fftw_complex* out = nullptr;
    int n = 0;

    explicit RealFftPlan(int size) : n(size) {
        in = fftw_alloc_real(n);
        out = fftw_alloc_complex(n / 2 + 1);
        std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
        plan = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
    }
    ~RealFftPlan() {
        std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
        if (plan) fftw_destroy_plan(plan);
        fftw_free(in);
        fftw_free(out);
    }
    RealFftPlan(const RealFftPlan&) = delete;
    RealFftPlan& operator=(const RealFftPlan&) = delete;
};

std::vector<double> make_window(const StftConfig& config) {
    std::vector<double> w(config.frame_size, 1.0);
    if (config.window == Window::hann) {
        const double step = 2.0 * std::numbers::pi / config.frame_size;
        for (int n = 0; n < config.frame_size; ++n) w[n] = 0.5 - 0.5 * std::cos(step * n);
    }
    return w;
}

}  // namespace

Spectrogram compute_stft(const std::vector<std::vector<double>>& channels,
                         const StftConfig& config) {
    config.validate();
    if (channels.empty()) throw ValidationError("compute_stft: no channels");
    const size_t len = channels.front().size();
    for (const auto& ch : channels)
        if (ch.size() != len) throw ValidationError("compute_stft: channel length mismatch");
    if (len < static_cast<size_t>(config.frame_size))
        throw ValidationError("compute_stft: signal shorter than one frame");

    const int num_mics = static_cast<int>(channels.size());
    const int num_frames = stft_frame_count(len, config);
    const int num_bins = config.num_bins();

    Spectrogram spec;
    spec.config = config;
    spec.num_mics = num_mics;
    spec.num_frames = num_frames;
    spec.data.resize(static_cast<size_t>(num_mics) * num_frames * num_bins);

    const std::vector<double> window = make_window(config);
    RealFftPlan fft(config.frame_size);

    for (int m = 0; m < num_mics; ++m) {
        const double* x = channels[m].data();
        for (int t = 0; t < num_frames; ++t) {
            const double* frame = x + static_cast<size_t>(t) * config.hop_size;
            for (int n = 0; n < config.frame_size; ++n) fft.in[n] = frame[n] * window[n];
            fftw_execute(fft.plan);
            std::complex<double>* dst = &spec.at(m, t, 0);
            for (int k = 0; k < num_bins; ++k) {
                const fftw_complex& c = fft.out[config.bin_lo + k];
                dst[k] = {c[0], c[1]};
            }
        }
    }
    return spec;
}

void TdoaLattice::rebuild() {
    if (tau_max <= 0) throw ValidationError("TdoaLattice: tau_max must be positive");
    if (num_points < 3 || num_points % 2 == 0)
        throw ValidationError("TdoaLattice: num_points must be odd and >= 3");
    values.resize(num_points);
    const double d = step();
    for (int g = 0; g < num_points; ++g) values[g] = -tau_max + d * g;
    values.front() = -tau_max;
    values.back() = tau_max;
    values[num_points / 2] = 0.0;
}

CrossSpectrum accumulate_cross_spectrum(const Spectrogram& spec, std::pair<int, int> pair,
                                        std::span<const int> frames) {
    const auto [i, j] = pair;
    if (i < 0 || j <= i || j >= spec.num_mics)
        throw ValidationError("accumulate_cross_spectrum: pair out of range");
    if (frames.empty()) throw ValidationError("accumulate_cross_spectrum: empty frame set");

    CrossSpectrum cs;
    cs.mic_i = i;
    cs.mic_j = j;
    cs.fft_size = spec.config.frame_size;
    cs.bin_lo = spec.config.bin_lo;
    cs.values.assign(spec.config.num_bins(), {0.0, 0.0});

    for (int t : frames) {
        if (t < 0 || t >= spec.num_frames)
            throw ValidationError("accumulate_cross_spectrum: frame index out of range");
        const std::complex<double>* xi = &spec.at(i, t, 0);
        const std::complex<double>* xj = &spec.at(j, t, 0);
        for (size_t k = 0; k < cs.values.size(); ++k) cs.values[k] += xi[k] * std::conj(xj[k]);
    }
    return cs;
}

GccPhatPlan::GccPhatPlan(const TdoaLattice& lattice, int fft_size, int bin_lo, int bin_hi)
    : lattice_(lattice), fft_size_(fft_size), bin_lo_(bin_lo), num_bins_(bin_hi - bin_lo) {
    if (fft_size <= 0 || bin_lo < 0 || num_bins_ <= 0)
        throw ValidationError("GccPhatPlan: bad bin range");
    const int G = lattice_.num_points;
    kernel_re_.resize(static_cast<size_t>(G) * num_bins_);
    kernel_im_.resize(static_cast<size_t>(G) * num_bins_);
    const double base = -2.0 * std::numbers::pi / fft_size;
    for (int g = 0; g < G; ++g) {
        const double w = base * lattice_.values[g];
        double* re = &kernel_re_[static_cast<size_t>(g) * num_bins_];
        double* im = &kernel_im_[static_cast<size_t>(g) * num_bins_];
        for (int k = 0; k < num_bins_; ++k) {
            const double phase = w * (bin_lo + k);
            re[k] = std::cos(phase);
            im[k] = std::sin(phase);
        }
    }
    scratch_re_.resize(num_bins_);
    scratch_im_.resize(num_bins_);
}

std::vector<double> GccPhatPlan::correlate(std::span<const std::complex<double>> values,
                                           int* skipped_bins) const {
    if (static_cast<int>(values.size()) != num_bins_)
        throw ValidationError("GccPhatPlan: cross-spectrum size does not match plan");

    double mean_mag = 0.0;
    for (const auto& v : values) mean_mag += std::abs(v);
    mean_mag /= static_cast<double>(num_bins_);
    const double eps = 1e-12 * mean_mag;

    int skipped = 0;
    for (int k = 0; k < num_bins_; ++k) {
        const double mag = std::abs(values[k]);
        if (mag <= eps) {
            scratch_re_[k] = 0.0;
            scratch_im_[k] = 0.0;
            ++skipped;
        } else {
            scratch_re_[k] = values[k].real() / mag;
            scratch_im_[k] = values[k].imag() / mag;
        }
    }
    if (skipped_bins) *skipped_bins += skipped;

    const int G = lattice_.num_points;
    std::vector<double> out(G);
    for (int g = 0; g < G; ++g) {
        const double* re = &kernel_re_[static_cast<size_t>(g) * num_bins_];
        const double* im = &kernel_im_[static_cast<size_t>(g) * num_bins_];
        double acc = 0.0;
        for (int k = 0; k < num_bins_; ++k)
            acc += re[k] * scratch_re_[k] - im[k] * scratch_im_[k];
        out[g] = acc;
    }
    return out;
}

std::vector<double> gcc_phat(const CrossSpectrum& cs, const TdoaLattice& lattice,
                             int* skipped_bins) {
    GccPhatPlan plan(lattice, cs.fft_size, cs.bin_lo, cs.bin_lo + static_cast<int>(cs.values.size()));
    return plan.correlate(cs.values, skipped_bins);
}

double estimate_tdoa(std::span<const double> gcc, const TdoaLattice& lattice) {
    if (static_cast<int>(gcc.size()) != lattice.num_points)
        throw ValidationError("estimate_tdoa: gcc length does not match lattice");
    int best = 0;
    for (int g = 1; g < lattice.num_points; ++g) {
        if (gcc[g] > gcc[best]) {
            best = g;
        } else if (gcc[g] == gcc[best]) {
            const double a = lattice.values[g], b = lattice.values[best];
            if (std::abs(a) < std::abs(b) || (std::abs(a) == std::abs(b) && a < b)) best = g;
        }
    }
    return lattice.values[best];
}

}  // namespace seldpair
