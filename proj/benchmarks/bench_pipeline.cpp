#include <benchmark/benchmark.h>

#include <complex>
#include <random>
#include <vector>

#include "seldpair/calibration.hpp"
#include "seldpair/config.hpp"
#include "seldpair/doa.hpp"
#include "seldpair/dsp.hpp"
#include "seldpair/geometry.hpp"

namespace {

using namespace seldpair;

std::vector<std::complex<double>> random_cross_spectrum(int bins, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<std::complex<double>> v(bins);
    for (auto& x : v) x = {n(rng), n(rng)};
    return v;
}

// One GCC-PHAT evaluation over the full lattice, the pipeline's hot loop.
void BM_correlate(benchmark::State& state) {
    RunConfig cfg;
    GccPhatPlan plan(cfg.lattice(), cfg.stft.frame_size, cfg.stft.bin_lo, cfg.stft.bin_hi);
    const auto cs = random_cross_spectrum(cfg.stft.num_bins(), 11);
    for (auto _ : state) benchmark::DoNotOptimize(plan.correlate(cs));
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_correlate);

// Four channels of one second at the reference parameterization.
void BM_stft_4ch_1s(benchmark::State& state) {
    RunConfig cfg;
    std::mt19937_64 rng(22);
    std::normal_distribution<double> n(0.0, 0.1);
    std::vector<std::vector<double>> channels(4);
    for (auto& ch : channels) {
        ch.resize(static_cast<size_t>(cfg.stft.sample_rate_hz));
        for (auto& x : ch) x = n(rng);
    }
    for (auto _ : state) benchmark::DoNotOptimize(compute_stft(channels, cfg.stft));
}
BENCHMARK(BM_stft_4ch_1s);

// Gaussian-kernel search over the full 324-point grid for one frame.
void BM_scan_doa(benchmark::State& state) {
    RunConfig cfg;
    const CalibrationTable table = analytic_calibration(
        regular_tetrahedron(0.042), cfg.grid, cfg.stft.sample_rate_hz, cfg.tau_max);
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> u(-cfg.tau_max, cfg.tau_max);
    std::vector<double> tdoas(static_cast<size_t>(table.num_pairs()));
    for (auto& t : tdoas) t = u(rng);
    for (auto _ : state) benchmark::DoNotOptimize(scan_doa(tdoas, table, cfg.kernel));
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_scan_doa);

// Cross-spectrum accumulation over a one-segment window for one pair.
void BM_accumulate_segment(benchmark::State& state) {
    RunConfig cfg;
    std::mt19937_64 rng(44);
    std::normal_distribution<double> n(0.0, 0.1);
    std::vector<std::vector<double>> channels(4);
    for (auto& ch : channels) {
        ch.resize(static_cast<size_t>(cfg.stft.sample_rate_hz) * 2);
        for (auto& x : ch) x = n(rng);
    }
    const Spectrogram spec = compute_stft(channels, cfg.stft);
    std::vector<int> frames(static_cast<size_t>(cfg.segment_frames));
    for (int t = 0; t < cfg.segment_frames; ++t) frames[t] = t;
    for (auto _ : state)
        benchmark::DoNotOptimize(accumulate_cross_spectrum(spec, {0, 1}, frames));
}
BENCHMARK(BM_accumulate_segment);

}  // namespace

BENCHMARK_MAIN();
