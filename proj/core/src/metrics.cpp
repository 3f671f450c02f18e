#include "seldpair/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <tuple>

namespace seldpair {

SegmentCounts segment_counts(const SegmentActivity& est, const SegmentActivity& ref) {
    if (est.num_segments != ref.num_segments || est.num_classes != ref.num_classes)
        throw ValidationError("segment_counts: estimate/reference shape mismatch");
    SegmentCounts out;
    out.segments.resize(est.num_segments);
    for (int l = 0; l < est.num_segments; ++l) {
        auto& e = out.segments[l];
        for (int c = 0; c < est.num_classes; ++c) {
            const bool a = est.at(l, c) != 0;
            const bool r = ref.at(l, c) != 0;
            e.tp += a && r;
            e.fn += !a && r;
            e.fp += a && !r;
            e.n += r;
        }
        e.s = std::min(e.fn, e.fp);
        e.d = std::max(0, e.fn - e.fp);
        e.i = std::max(0, e.fp - e.fn);
    }
    return out;
}

std::pair<double, double> compute_er_f(const SegmentCounts& counts) {
    const auto t = counts.totals();
    if (t.n == 0) throw DataError("compute_er_f: reference has no active events, ER undefined");
    const double er = static_cast<double>(t.s + t.d + t.i) / static_cast<double>(t.n);
    const long denom = 2L * t.tp + t.fn + t.fp;
    const double f = denom == 0 ? 1.0 : 2.0 * static_cast<double>(t.tp) / denom;
    return {er, f};
}

namespace {

std::array<double, 3> unit_vector(const Doa& d) {
    constexpr double d2r = std::numbers::pi / 180.0;
    const double az = d.azimuth_deg * d2r, el = d.elevation_deg * d2r;
    return {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)};
}

}  // namespace

double angular_distance_deg(const Doa& a, const Doa& b) {
    // Chord form: exact zero for identical directions and stable near zero,
    // where the dot-product arccosine loses half the mantissa.
    const std::array<double, 3> u = unit_vector(a), v = unit_vector(b);
    const double chord = std::hypot(u[0] - v[0], u[1] - v[1], u[2] - v[2]);
    return 2.0 * std::asin(std::clamp(chord / 2.0, 0.0, 1.0)) * 180.0 / std::numbers::pi;
}

double assignment_cost(const std::vector<double>& cost, int rows, int cols) {
    if (rows < 1 || cols < 1) return 0.0;
    if (cost.size() != static_cast<size_t>(rows) * cols)
        throw ValidationError("assignment_cost: matrix size mismatch");
    // The augmenting-path solver wants rows <= cols; the cost of a matching is
    // symmetric under transposition.
    std::vector<double> a;
    const std::vector<double>* m = &cost;
    if (rows > cols) {
        a.resize(cost.size());
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) a[static_cast<size_t>(c) * rows + r] = cost[static_cast<size_t>(r) * cols + c];
        std::swap(rows, cols);
        m = &a;
    }

    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(rows + 1, 0.0), v(cols + 1, 0.0);
    std::vector<int> match(cols + 1, 0), way(cols + 1, 0);
    for (int i = 1; i <= rows; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(cols + 1, inf);
        std::vector<char> used(cols + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = match[j0];
            int j1 = -1;
            double delta = inf;
            for (int j = 1; j <= cols; ++j) {
                if (used[j]) continue;
                const double cur = (*m)[static_cast<size_t>(i0 - 1) * cols + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= cols; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0);
    }

    double total = 0.0;
    for (int j = 1; j <= cols; ++j)
        if (match[j]) total += (*m)[static_cast<size_t>(match[j] - 1) * cols + (j - 1)];
    return total;
}

std::optional<double> compute_doae(const FrameDoas& est, const FrameDoas& ref) {
    if (est.size() != ref.size()) throw ValidationError("compute_doae: frame count mismatch");
    double num = 0.0;
    long denom = 0;
    std::vector<double> cost;
    for (size_t t = 0; t < est.size(); ++t) {
        const int de = static_cast<int>(est[t].size());
        const int dr = static_cast<int>(ref[t].size());
        if (de == 0) continue;
        denom += de;
        if (dr == 0) continue;
        cost.assign(static_cast<size_t>(de) * dr, 0.0);
        for (int i = 0; i < de; ++i)
            for (int j = 0; j < dr; ++j)
                cost[static_cast<size_t>(i) * dr + j] = angular_distance_deg(est[t][i], ref[t][j]);
        num += assignment_cost(cost, de, dr);
    }
    if (denom == 0) return std::nullopt;
    return num / static_cast<double>(denom);
}

double compute_fr(const FrameDoas& est, const FrameDoas& ref) {
    if (est.size() != ref.size()) throw ValidationError("compute_fr: frame count mismatch");
    if (est.empty()) throw ValidationError("compute_fr: no frames");
    long hits = 0;
    for (size_t t = 0; t < est.size(); ++t) hits += est[t].size() == ref[t].size();
    return static_cast<double>(hits) / static_cast<double>(est.size());
}

MetricsReport evaluate(const SegmentActivity& est_segments, const SegmentActivity& ref_segments,
                       const FrameDoas& est_doas, const FrameDoas& ref_doas) {
    MetricsReport report;
    const auto counts = segment_counts(est_segments, ref_segments);
    std::tie(report.er, report.f) = compute_er_f(counts);
    report.doae = compute_doae(est_doas, ref_doas);
    report.fr = compute_fr(est_doas, ref_doas);
    report.frames_evaluated = static_cast<long>(est_doas.size());
    for (const auto& s : est_doas) report.est_doa_count += static_cast<long>(s.size());
    for (const auto& s : ref_doas) report.ref_doa_count += static_cast<long>(s.size());
    for (size_t t = 0; t < est_doas.size(); ++t)
        report.matched_doa_count +=
            static_cast<long>(std::min(est_doas[t].size(), ref_doas[t].size()));
    return report;
}

}  // namespace seldpair
