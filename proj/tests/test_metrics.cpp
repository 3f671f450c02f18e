#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "seldpair/metrics.hpp"

using namespace seldpair;

namespace {

SegmentActivity segments_of(int num_segments, int num_classes,
                            const std::vector<std::uint8_t>& vals) {
    SegmentActivity s;
    s.resize(num_segments, num_classes);
    s.segment_frames = 50;
    s.values = vals;
    return s;
}

// All-permutations minimum assignment, the reference for Hungarian.
double brute_force_assignment(const std::vector<double>& cost, int rows, int cols) {
    const bool flip = rows > cols;
    const int r = flip ? cols : rows;
    const int c = flip ? rows : cols;
    auto at = [&](int i, int j) { return flip ? cost[j * cols + i] : cost[i * cols + j]; };
    std::vector<int> idx(c);
    std::iota(idx.begin(), idx.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    std::sort(idx.begin(), idx.end());
    do {
        double total = 0.0;
        for (int i = 0; i < r; ++i) total += at(i, idx[i]);
        best = std::min(best, total);
    } while (std::next_permutation(idx.begin(), idx.end()));
    return best;
}

}  // namespace

TEST_CASE("segment counts on hand-worked fixtures") {
    SUBCASE("perfect prediction") {
        const auto ref = segments_of(2, 3, {1, 0, 1, 0, 1, 0});
        const SegmentCounts counts = segment_counts(ref, ref);
        const auto t = counts.totals();
        CHECK(t.tp == 3);
        CHECK(t.fn == 0);
        CHECK(t.fp == 0);
        CHECK(t.n == 3);
        CHECK(t.s + t.d + t.i == 0);
    }

    SUBCASE("one miss becomes a deletion") {
        const auto ref = segments_of(1, 2, {1, 0});
        const auto est = segments_of(1, 2, {0, 0});
        const auto e = segment_counts(est, ref).segments[0];
        CHECK(e.fn == 1);
        CHECK(e.fp == 0);
        CHECK(e.s == 0);
        CHECK(e.d == 1);
        CHECK(e.i == 0);
        CHECK(e.n == 1);
    }

    SUBCASE("two false alarms become insertions") {
        const auto ref = segments_of(1, 3, {0, 0, 0});
        const auto est = segments_of(1, 3, {1, 0, 1});
        const auto e = segment_counts(est, ref).segments[0];
        CHECK(e.fp == 2);
        CHECK(e.s == 0);
        CHECK(e.d == 0);
        CHECK(e.i == 2);
        CHECK(e.n == 0);
    }

    SUBCASE("miss plus false alarm in one segment is a substitution") {
        const auto ref = segments_of(1, 2, {1, 0});
        const auto est = segments_of(1, 2, {0, 1});
        const auto e = segment_counts(est, ref).segments[0];
        CHECK(e.fn == 1);
        CHECK(e.fp == 1);
        CHECK(e.s == 1);
        CHECK(e.d == 0);
        CHECK(e.i == 0);
    }

    SUBCASE("shape mismatches are rejected") {
        const auto ref = segments_of(2, 2, {1, 0, 0, 1});
        const auto est = segments_of(1, 2, {1, 0});
        CHECK_THROWS_AS(segment_counts(est, ref), ValidationError);
    }
}

TEST_CASE("error rate and F-score on a fixed scenario") {
    // Segment 0: ref {A}, est {} -> deletion. Segment 1: ref {A}, est {A, B}
    // -> hit plus insertion. N = 2, so ER = (0 + 1 + 1) / 2 = 1.
    const auto ref = segments_of(2, 2, {1, 0, 1, 0});
    const auto est = segments_of(2, 2, {0, 0, 1, 1});
    const auto [er, f] = compute_er_f(segment_counts(est, ref));
    CHECK(er == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f == doctest::Approx(2.0 * 1 / (2.0 * 1 + 1 + 1)).epsilon(1e-12));
}

TEST_CASE("perfect prediction scores ER 0 and F 1; empty reference raises") {
    const auto ref = segments_of(3, 2, {1, 0, 0, 1, 1, 1});
    const auto [er, f] = compute_er_f(segment_counts(ref, ref));
    CHECK(er == 0.0);
    CHECK(f == 1.0);

    const auto empty = segments_of(2, 2, {0, 0, 0, 0});
    CHECK_THROWS_AS(compute_er_f(segment_counts(empty, empty)), DataError);
}

TEST_CASE("ER and F do not depend on which miss count is called FN") {
    // Recompute ER and F with the FN/FP roles exchanged (misses counted as
    // false positives and vice versa) while N stays the reference count.
    // S, D+I, and the F denominator are symmetric in (FN, FP), so both
    // conventions must agree on every input.
    auto swapped_roles = [](const SegmentActivity& est, const SegmentActivity& ref) {
        int tp = 0, fn = 0, fp = 0, n = 0, s = 0, d = 0, ins = 0;
        for (int l = 0; l < ref.num_segments; ++l) {
            int seg_fn = 0, seg_fp = 0;
            for (int c = 0; c < ref.num_classes; ++c) {
                const bool e = est.at(l, c) != 0, r = ref.at(l, c) != 0;
                tp += e && r;
                seg_fn += e && !r;  // roles exchanged on purpose
                seg_fp += !e && r;
                n += r;
            }
            fn += seg_fn;
            fp += seg_fp;
            s += std::min(seg_fn, seg_fp);
            d += std::max(0, seg_fn - seg_fp);
            ins += std::max(0, seg_fp - seg_fn);
        }
        const double er = static_cast<double>(s + d + ins) / n;
        const double den = 2.0 * tp + fn + fp;
        const double f = den == 0.0 ? 1.0 : 2.0 * tp / den;
        return std::pair<double, double>{er, f};
    };

    std::mt19937_64 rng(31337);
    std::bernoulli_distribution coin(0.5);
    int done = 0;
    while (done < 100) {
        std::vector<std::uint8_t> est(24), ref(24);
        for (auto& v : est) v = coin(rng) ? 1 : 0;
        for (auto& v : ref) v = coin(rng) ? 1 : 0;
        if (std::find(ref.begin(), ref.end(), 1) == ref.end()) continue;
        const auto se = segments_of(6, 4, est);
        const auto sr = segments_of(6, 4, ref);
        const auto conventional = compute_er_f(segment_counts(se, sr));
        const auto exchanged = swapped_roles(se, sr);
        CHECK(conventional.first == doctest::Approx(exchanged.first).epsilon(1e-12));
        CHECK(conventional.second == doctest::Approx(exchanged.second).epsilon(1e-12));
        ++done;
    }
}

TEST_CASE("angular distance basics") {
    const Doa a{0.0, 0.0};
    CHECK(angular_distance_deg(a, a) == doctest::Approx(0.0));
    CHECK(angular_distance_deg(a, Doa{180.0, 0.0}) == doctest::Approx(180.0).epsilon(1e-9));
    CHECK(angular_distance_deg(a, Doa{90.0, 0.0}) == doctest::Approx(90.0).epsilon(1e-9));
    CHECK(angular_distance_deg(a, Doa{0.0, 90.0}) == doctest::Approx(90.0).epsilon(1e-9));
    // Azimuth wraps: -180 and +180 name the same direction.
    CHECK(angular_distance_deg(Doa{-180.0, 20.0}, Doa{180.0, 20.0}) ==
          doctest::Approx(0.0).epsilon(1e-9));
    // At the pole, azimuth is irrelevant.
    CHECK(angular_distance_deg(Doa{0.0, 90.0}, Doa{121.0, 90.0}) ==
          doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("angular distance is a metric on random triples") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> uaz(-180.0, 180.0);
    std::uniform_real_distribution<double> uel(-90.0, 90.0);
    for (int trial = 0; trial < 200; ++trial) {
        const Doa a{uaz(rng), uel(rng)}, b{uaz(rng), uel(rng)}, c{uaz(rng), uel(rng)};
        const double ab = angular_distance_deg(a, b);
        const double ba = angular_distance_deg(b, a);
        const double ac = angular_distance_deg(a, c);
        const double cb = angular_distance_deg(c, b);
        CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
        CHECK(ab >= 0.0);
        CHECK(ab <= 180.0);
        CHECK(ab <= ac + cb + 1e-9);
        CHECK(angular_distance_deg(a, a) < 1e-6);
    }
}

TEST_CASE("assignment cost equals brute force up to 4x4") {
    std::mt19937_64 rng(7777);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    std::uniform_int_distribution<int> dim(1, 4);
    for (int trial = 0; trial < 1000; ++trial) {
        const int rows = dim(rng), cols = dim(rng);
        std::vector<double> cost(static_cast<size_t>(rows) * cols);
        for (auto& v : cost) v = u(rng);
        const double fast = assignment_cost(cost, rows, cols);
        const double slow = brute_force_assignment(cost, rows, cols);
        CHECK(fast == doctest::Approx(slow).epsilon(1e-9));
    }
}

TEST_CASE("assignment handles degenerate and rectangular shapes") {
    CHECK(assignment_cost({5.0}, 1, 1) == doctest::Approx(5.0));
    // 2x3: best picks 1 and 2.
    CHECK(assignment_cost({9, 1, 4, 8, 7, 2}, 2, 3) == doctest::Approx(3.0));
    // 3x2 transpose of the same matrix.
    CHECK(assignment_cost({9, 8, 1, 7, 4, 2}, 3, 2) == doctest::Approx(3.0));
}

TEST_CASE("DOA error on matched frames") {
    SUBCASE("exact estimates give zero error") {
        FrameDoas ref{{{10.0, 0.0}, {50.0, 20.0}}, {{-120.0, -30.0}}};
        FrameDoas est{{{50.0, 20.0}, {10.0, 0.0}}, {{-120.0, -30.0}}};  // order swapped
        const auto doae = compute_doae(est, ref);
        REQUIRE(doae.has_value());
        CHECK(*doae == doctest::Approx(0.0).epsilon(1e-9));
    }

    SUBCASE("single-frame known error") {
        FrameDoas ref{{{0.0, 0.0}}};
        FrameDoas est{{{10.0, 0.0}}};
        CHECK(*compute_doae(est, ref) == doctest::Approx(10.0).epsilon(1e-9));
    }

    SUBCASE("extra estimates dilute the mean through the denominator") {
        // One matched pair at 10 degrees, one unmatched estimate: 10 / 2.
        FrameDoas ref{{{0.0, 0.0}}};
        FrameDoas est{{{10.0, 0.0}, {90.0, 0.0}}};
        CHECK(*compute_doae(est, ref) == doctest::Approx(5.0).epsilon(1e-9));
    }

    SUBCASE("no estimates anywhere leaves the metric undefined") {
        FrameDoas ref{{{0.0, 0.0}}, {}};
        FrameDoas est{{}, {}};
        CHECK_FALSE(compute_doae(est, ref).has_value());
    }

    SUBCASE("frame count mismatch is rejected") {
        FrameDoas ref{{}, {}};
        FrameDoas est{{}};
        CHECK_THROWS_AS(compute_doae(est, ref), ValidationError);
    }
}

TEST_CASE("frame recall compares source counts only") {
    FrameDoas ref{{{0.0, 0.0}}, {{10.0, 0.0}}, {}, {{20.0, 0.0}, {30.0, 0.0}}};
    FrameDoas est{{{90.0, 40.0}}, {}, {}, {{20.0, 0.0}, {30.0, 0.0}}};
    // Counts match on frames 0 (1 vs 1, direction irrelevant), 2, 3.
    CHECK(compute_fr(est, ref) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(compute_fr(ref, ref) == doctest::Approx(1.0));
    CHECK_THROWS_AS(compute_fr(FrameDoas{}, FrameDoas{}), ValidationError);
}

TEST_CASE("evaluate assembles the full report") {
    const auto ref = segments_of(2, 1, {1, 0});
    FrameDoas ref_doas{{{10.0, 0.0}}, {}};
    const MetricsReport rep = evaluate(ref, ref, ref_doas, ref_doas);
    CHECK(rep.er == 0.0);
    CHECK(rep.f == 1.0);
    REQUIRE(rep.doae.has_value());
    CHECK(*rep.doae == doctest::Approx(0.0));
    CHECK(rep.fr == 1.0);
    CHECK(rep.frames_evaluated == 2);
    CHECK(rep.est_doa_count == 1);
    CHECK(rep.ref_doa_count == 1);
    CHECK(rep.matched_doa_count == 1);
}
