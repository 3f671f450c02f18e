#include "seldpair/sim.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <string>

#include "fftw_util.hpp"
#include "seldpair/sed.hpp"

namespace seldpair {

namespace {

// Gaussian variates from explicit Box-Muller over mt19937_64 words, because
// std::normal_distribution's algorithm is implementation-defined and the
// scene contract is bit-exact determinism.
class GaussianGen {
public:
    explicit GaussianGen(std::uint64_t seed) : rng_(seed) {}

    double operator()() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = (static_cast<double>(rng_() >> 11) + 0.5) * 0x1.0p-53;
        const double u2 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 rng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

bool odd_smooth(long n) {
    for (long f : {3, 5, 7, 11, 13})
        while (n % f == 0) n /= f;
    return n == 1;
}

long next_odd_smooth(long n) {
    long c = n | 1;
    while (!odd_smooth(c)) c += 2;
    return c;
}

double rms(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return v.empty() ? 0.0 : std::sqrt(acc / static_cast<double>(v.size()));
}

std::vector<double> render_source(const SceneEvent& ev, long num_samples, double sample_rate_hz,
                                  GaussianGen& gen) {
    std::vector<double> s(num_samples);
    switch (ev.kind) {
        case SourceKind::white_noise:
            for (auto& x : s) x = gen();
            break;
        case SourceKind::tone: {
            const double phase0 = 2.0 * std::numbers::pi * gen.uniform();
            const double w = 2.0 * std::numbers::pi * ev.tone_hz / sample_rate_hz;
            for (long n = 0; n < num_samples; ++n)
                s[n] = std::sin(w * static_cast<double>(n) + phase0);
            break;
        }
        case SourceKind::impulse_train: {
            constexpr long period = 100;
            const long start = static_cast<long>(gen.uniform() * period) % period;
            for (long n = start; n < num_samples; n += period) s[n] = 1.0;
            break;
        }
    }
    return s;
}

const char* kind_name(SourceKind k) {
    switch (k) {
        case SourceKind::white_noise: return "white_noise";
        case SourceKind::tone: return "tone";
        case SourceKind::impulse_train: return "impulse_train";
    }
    return "?";
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t tag) {
    std::uint64_t x = base + 0x9E3779B97F4A7C15ull * (tag + 1);
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

int SceneScript::num_classes() const {
    int c = 0;
    for (const auto& ev : events) c = std::max(c, ev.klass + 1);
    return std::max(c, 1);
}

void SceneScript::validate(const DoaGrid& grid) const {
    if (!(duration_sec > 0)) throw ValidationError("SceneScript: duration must be positive");
    if (!(noise_std >= 0)) throw ValidationError("SceneScript: noise_std must be >= 0");
    for (size_t i = 0; i < events.size(); ++i) {
        const auto& ev = events[i];
        const std::string who = "event " + std::to_string(i);
        if (ev.klass < 0) throw ValidationError("SceneScript: " + who + " has negative class");
        if (!(ev.onset_sec < ev.offset_sec))
            throw ValidationError("SceneScript: " + who + " needs onset < offset");
        if (ev.offset_sec > duration_sec)
            throw ValidationError("SceneScript: " + who + " ends after the scene");
        if (ev.onset_sec < 0) throw ValidationError("SceneScript: " + who + " starts before 0");
        if (ev.doa_index < 0 || ev.doa_index >= grid.size())
            throw ValidationError("SceneScript: " + who + " DOA index off the grid");
        if (ev.kind == SourceKind::tone && !(ev.tone_hz > 0))
            throw ValidationError("SceneScript: " + who + " tone frequency must be positive");
        for (size_t j = i + 1; j < events.size(); ++j) {
            const auto& other = events[j];
            if (other.klass != ev.klass) continue;
            if (ev.onset_sec < other.offset_sec && other.onset_sec < ev.offset_sec)
                throw ValidationError("SceneScript: events " + std::to_string(i) + " and " +
                                      std::to_string(j) + " of class " + std::to_string(ev.klass) +
                                      " overlap");
        }
    }
}

std::vector<double> fractional_delay(std::span<const double> signal, double delay_samples,
                                     int pad) {
    if (pad < 1) throw ValidationError("fractional_delay: pad must be >= 1");
    if (signal.empty()) throw ValidationError("fractional_delay: empty signal");
    const long n = static_cast<long>(signal.size());
    if (std::abs(delay_samples) > pad)
        throw ValidationError("fractional_delay: |delay| exceeds pad");
    const long len = next_odd_smooth(n + pad);
    const long bins = len / 2 + 1;  // odd length: no Nyquist bin

    double* buf = fftw_alloc_real(len);
    fftw_complex* spec = fftw_alloc_complex(bins);
    fftw_plan fwd, inv;
    {
        std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
        fwd = fftw_plan_dft_r2c_1d(static_cast<int>(len), buf, spec, FFTW_ESTIMATE);
        inv = fftw_plan_dft_c2r_1d(static_cast<int>(len), spec, buf, FFTW_ESTIMATE);
    }

    std::copy(signal.begin(), signal.end(), buf);
    std::fill(buf + n, buf + len, 0.0);
    fftw_execute(fwd);

    const double base = -2.0 * std::numbers::pi * delay_samples / static_cast<double>(len);
    for (long k = 0; k < bins; ++k) {
        const double c = std::cos(base * static_cast<double>(k));
        const double s = std::sin(base * static_cast<double>(k));
        const double re = spec[k][0], im = spec[k][1];
        spec[k][0] = re * c - im * s;
        spec[k][1] = re * s + im * c;
    }
    fftw_execute(inv);

    std::vector<double> out(len);
    const double scale = 1.0 / static_cast<double>(len);
    for (long i = 0; i < len; ++i) out[i] = buf[i] * scale;

    {
        std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(inv);
    }
    fftw_free(buf);
    fftw_free(spec);
    return out;
}

SimulatedScene synthesize(const SceneScript& script, const ArrayGeometry& geometry,
                          const StftConfig& stft, const DoaGrid& grid, double tau_max,
                          int segment_frames) {
    script.validate(grid);
    geometry.validate();
    stft.validate();
    if (segment_frames < 1) throw ValidationError("synthesize: segment_frames must be >= 1");

    const int M = geometry.num_mics();
    const int P = num_pairs(M);
    const int C = script.num_classes();
    const double fs = stft.sample_rate_hz;
    const long num_samples = std::llround(script.duration_sec * fs);

    SimulatedScene scene;
    scene.signals.assign(M, std::vector<double>(num_samples, 0.0));

    // Largest per-mic delay offset, kept causal by a common shift.
    double max_radius = 0.0;
    for (const auto& p : geometry.mic_positions)
        max_radius = std::max(max_radius, std::hypot(p[0], p[1], p[2]));
    const double causal_shift = fs * max_radius / geometry.speed_of_sound;

    // Per-event free-field TDOAs; also the oracle tensor payload.
    std::vector<std::vector<double>> event_tau(script.events.size());
    for (size_t e = 0; e < script.events.size(); ++e) {
        const auto [az, el] = grid.lookup(script.events[e].doa_index);
        event_tau[e] = predict_freefield(geometry, az, el, fs);
        for (double tau : event_tau[e])
            if (std::abs(tau) > tau_max)
                throw ValidationError("synthesize: event " + std::to_string(e) +
                                      " needs a pair TDOA of " + std::to_string(tau) +
                                      " samples, beyond the lattice bound");
    }

    if (!script.events.empty()) {
        if (script.noise_std > 0) {
            for (int m = 0; m < M; ++m) {
                GaussianGen gen(mix_seed(script.seed, 0x100 + m));
                for (auto& x : scene.signals[m]) x = script.noise_std * gen();
            }
        }

        constexpr double deg2rad = std::numbers::pi / 180.0;
        for (size_t e = 0; e < script.events.size(); ++e) {
            const auto& ev = script.events[e];
            const long onset = std::llround(ev.onset_sec * fs);
            const long offset = std::llround(ev.offset_sec * fs);
            const long len = offset - onset;
            if (len < 1)
                throw ValidationError("synthesize: event " + std::to_string(e) +
                                      " rounds to zero samples");

            GaussianGen gen(mix_seed(script.seed, 0x10000 + e));
            std::vector<double> src = render_source(ev, len, fs, gen);
            const double r = rms(src);
            if (r <= 0)
                throw DataError(std::string("synthesize: ") + kind_name(ev.kind) +
                                " source rendered silent");
            const double target = script.noise_std > 0
                                      ? script.noise_std * std::pow(10.0, ev.snr_db / 20.0)
                                      : std::pow(10.0, ev.snr_db / 20.0);
            const double gain = target / r;
            for (auto& x : src) x *= gain;

            const auto [az, el] = grid.lookup(ev.doa_index);
            const double u[3] = {std::cos(el * deg2rad) * std::cos(az * deg2rad),
                                 std::cos(el * deg2rad) * std::sin(az * deg2rad),
                                 std::sin(el * deg2rad)};
            for (int m = 0; m < M; ++m) {
                const auto& pos = geometry.mic_positions[m];
                const double proj = u[0] * pos[0] + u[1] * pos[1] + u[2] * pos[2];
                const double delay = causal_shift - fs * proj / geometry.speed_of_sound;
                const std::vector<double> shifted =
                    fractional_delay(src, delay, stft.frame_size);
                const long upper = std::min<long>(static_cast<long>(shifted.size()),
                                                  num_samples - onset);
                for (long i = 0; i < upper; ++i) scene.signals[m][onset + i] += shifted[i];
            }
        }
    }

    // Reference rasterization by frame-center time, half-open [onset, offset).
    scene.num_frames = stft_frame_count(num_samples, stft);
    scene.ref_activity.resize(scene.num_frames, C);
    scene.ref_doas.assign(scene.num_frames, {});
    scene.single_source_doa.assign(scene.num_frames, -1);
    scene.oracle_scores.resize(scene.num_frames, P, C, 0.0);
    scene.oracle_tdoas.resize(scene.num_frames, P, C);
    scene.oracle_tdoas.tau_max = tau_max;

    for (int t = 0; t < scene.num_frames; ++t) {
        const double center =
            (static_cast<double>(t) * stft.hop_size + stft.frame_size / 2.0) / fs;
        int active = 0, last_q = -1;
        for (size_t e = 0; e < script.events.size(); ++e) {
            const auto& ev = script.events[e];
            if (!(center >= ev.onset_sec && center < ev.offset_sec)) continue;
            ++active;
            last_q = ev.doa_index;
            scene.ref_activity.at(t, ev.klass) = 1;
            const auto [az, el] = grid.lookup(ev.doa_index);
            scene.ref_doas[t].push_back({az, el});
            for (int p = 0; p < P; ++p) {
                scene.oracle_scores.at(t, p, ev.klass) = 1.0;
                scene.oracle_tdoas.at(t, p, ev.klass) = event_tau[e][p];
            }
        }
        if (active == 1) scene.single_source_doa[t] = last_q;
    }
    scene.ref_segments = to_segments(scene.ref_activity, segment_frames);

    for (const auto& ev : script.events) {
        const auto [az, el] = grid.lookup(ev.doa_index);
        scene.labels.push_back(
            {std::to_string(ev.klass), ev.onset_sec, ev.offset_sec, az, el});
    }
    return scene;
}

}  // namespace seldpair
