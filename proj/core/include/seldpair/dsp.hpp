#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "seldpair/errors.hpp"
#include "seldpair/pairs.hpp"

namespace seldpair {

enum class Window { hann, rectangular };

/// STFT framing parameters. Defaults give 43 ms frames, 20 ms hop, and a
/// retained band of 512 bins spanning roughly 23 Hz .. 12 kHz at 48 kHz.
struct StftConfig {
    double sample_rate_hz = 48000.0;
    int frame_size = 2048;  // N
    int hop_size = 960;     // samples between frame starts
    int bin_lo = 1;         // first retained bin, inclusive
    int bin_hi = 513;       // one past the last retained bin
    Window window = Window::hann;

    int num_bins() const { return bin_hi - bin_lo; }
    void validate() const;
};

/// Complex STFT coefficients for all channels of one recording.
/// Layout: [mic][frame][bin], bins relative to config.bin_lo.
struct Spectrogram {
    StftConfig config;
    int num_mics = 0;
    int num_frames = 0;
    std::vector<std::complex<double>> data;

    std::complex<double>& at(int mic, int frame, int bin) {
        return data[(static_cast<size_t>(mic) * num_frames + frame) * config.num_bins() + bin];
    }
    const std::complex<double>& at(int mic, int frame, int bin) const {
        return data[(static_cast<size_t>(mic) * num_frames + frame) * config.num_bins() + bin];
    }
    std::span<const std::complex<double>> frame(int mic, int frame) const {
        return {data.data() + (static_cast<size_t>(mic) * num_frames + frame) * config.num_bins(),
                static_cast<size_t>(config.num_bins())};
    }
};

/// Frame count for a channel of `len` samples: floor((len - N) / hop) + 1.
int stft_frame_count(size_t len, const StftConfig& config);

/// Forward STFT of all channels. Channels must be the same length and at
/// least one frame long. Only bins [bin_lo, bin_hi) are kept.
Spectrogram compute_stft(const std::vector<std::vector<double>>& channels,
                         const StftConfig& config);

/// Uniform grid of candidate TDOA values spanning [-tau_max, +tau_max].
struct TdoaLattice {
    double tau_max = 20.0;
    int num_points = 101;
    std::vector<double> values;

    TdoaLattice() { rebuild(); }
    TdoaLattice(double tau_max_samples, int points) : tau_max(tau_max_samples), num_points(points) {
        rebuild();
    }
    double step() const { return 2.0 * tau_max / (num_points - 1); }
    void rebuild();
};

/// Cross-spectrum of one microphone pair, accumulated over a frame set.
/// values[k] covers absolute bins [bin_lo, bin_lo + values.size()).
struct CrossSpectrum {
    int mic_i = 0;
    int mic_j = 1;
    int fft_size = 0;  // N of the source STFT; needed by the GCC kernel
    int bin_lo = 0;
    std::vector<std::complex<double>> values;
};

/// values[k] = sum over `frames` of X_i[k] * conj(X_j[k]).
CrossSpectrum accumulate_cross_spectrum(const Spectrogram& spec, std::pair<int, int> pair,
                                        std::span<const int> frames);

/// Precomputed phase table for evaluating GCC-PHAT directly on the
/// fractional lattice: out[g] = Re( sum_k exp(-2*pi*i*tau_g*k/N) * u[k] )
/// where u is the phase-normalized cross-spectrum. Positive lag means the
/// second channel of the pair receives the signal later.
class GccPhatPlan {
public:
    GccPhatPlan(const TdoaLattice& lattice, int fft_size, int bin_lo, int bin_hi);

    /// Bins with |value| < 1e-12 * (mean magnitude) contribute nothing;
    /// the count of such bins is added to *skipped_bins when given.
    std::vector<double> correlate(std::span<const std::complex<double>> values,
                                  int* skipped_bins = nullptr) const;

    const TdoaLattice& lattice() const { return lattice_; }
    int fft_size() const { return fft_size_; }
    int bin_lo() const { return bin_lo_; }
    int num_bins() const { return num_bins_; }

private:
    TdoaLattice lattice_;
    int fft_size_;
    int bin_lo_;
    int num_bins_;
    std::vector<double> kernel_re_;  // [lag][bin]
    std::vector<double> kernel_im_;
    mutable std::vector<double> scratch_re_;
    mutable std::vector<double> scratch_im_;
};

/// One-shot convenience wrapper around GccPhatPlan.
std::vector<double> gcc_phat(const CrossSpectrum& cs, const TdoaLattice& lattice,
                             int* skipped_bins = nullptr);

/// Lattice value at the argmax. Ties go to the smallest |tau|, then to the
/// negative lag.
double estimate_tdoa(std::span<const double> gcc, const TdoaLattice& lattice);

}  // namespace seldpair
