#include <random>

#include <gtest/gtest.h>

#include "cascadeopt/pareto.hpp"
#include "oracles.hpp"

using namespace cascadeopt;

namespace {

EvalPoint pt(double a, double t, std::uint64_t id = 0) { return {{id}, a, t, 1, id}; }

std::vector<EvalPoint> random_points(std::mt19937_64& rng, std::size_t n, bool coarse) {
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<EvalPoint> out;
    for (std::size_t i = 0; i < n; ++i) {
        double a = u(rng), t = 1 + 999 * u(rng);
        if (coarse) {  // force plenty of ties and duplicates
            a = std::round(a * 20) / 20;
            t = std::round(t / 50) * 50 + 1;
        }
        out.push_back(pt(a, t, rng()));
    }
    return out;
}

}  // namespace

TEST(Frontier, Examples) {
    EXPECT_EQ(pareto_frontier(std::vector{pt(0.9, 100)}).points, std::vector{pt(0.9, 100)});
    EXPECT_EQ(pareto_frontier(std::vector{pt(0.9, 100), pt(0.8, 100)}).points, std::vector{pt(0.9, 100)});
    // exact duplicates keep the smaller id
    EXPECT_EQ(pareto_frontier(std::vector{pt(0.9, 100, 7), pt(0.9, 100, 3)}).points, std::vector{pt(0.9, 100, 3)});
    EXPECT_THROW(pareto_frontier(std::vector<EvalPoint>{}), Error);
    EXPECT_THROW(pareto_frontier(std::vector{pt(0.9, 0)}), Error);
    EXPECT_THROW(pareto_frontier(std::vector{pt(1.2, 5)}), Error);
}

TEST(Frontier, RandomSetsMatchPairwiseOracle) {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        const auto pts = random_points(rng, trial < 10 ? 2000 : 10000, trial % 2 == 0);
        const auto f = pareto_frontier(pts);
        ASSERT_EQ(f.points, oracle::frontier(pts)) << trial;
        for (std::size_t k = 1; k < f.points.size(); ++k) {
            EXPECT_GT(f.points[k - 1].accuracy, f.points[k].accuracy);
            EXPECT_LT(f.points[k - 1].throughput_fps, f.points[k].throughput_fps);
        }
    }
}

TEST(Frontier, MergeAndAccumulatorAgreeWithOneShot) {
    std::mt19937_64 rng(42);
    const auto pts = random_points(rng, 5000, true);
    const auto whole = pareto_frontier(pts);
    std::vector<ParetoFrontier> parts;
    for (std::size_t s = 0; s < pts.size(); s += 700)
        parts.push_back(pareto_frontier(std::span(pts).subspan(s, std::min<std::size_t>(700, pts.size() - s))));
    EXPECT_EQ(merge_frontiers(parts).points, whole.points);
    FrontierAccumulator acc(64);
    for (const auto& p : pts) acc.add(p);
    EXPECT_EQ(acc.finish().points, whole.points);
}

TEST(Alc, Examples) {
    const auto one = pareto_frontier(std::vector{pt(0.9, 100)});
    EXPECT_NEAR(alc(one, 0.8, 0.9), 10.0, 1e-12);
    const auto two = pareto_frontier(std::vector{pt(0.9, 100), pt(0.8, 200)});
    EXPECT_NEAR(alc(two, 0.8, 0.9), 10.0, 1e-12);
    EXPECT_NEAR(average_throughput(one, 0.8, 0.9), 100.0, 1e-9);
    EXPECT_NEAR(average_throughput(two, 0.8, 0.9), 100.0, 1e-9);
    EXPECT_NEAR(alc(two, 0.7, 0.9), 200 * 0.1 + 100 * 0.1, 1e-12);
    EXPECT_THROW(alc(two, 0.8, 0.95), Error);
    EXPECT_NEAR(alc(two, 0.8, 1.0, AboveMaxAccuracy::Zero), 10.0, 1e-12);
    EXPECT_THROW(alc(two, 0.9, 0.8), Error);
}

TEST(Alc, RandomFrontiersMatchRiemannSum) {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 5; ++trial) {
        auto pts = random_points(rng, 50, false);
        const auto f = pareto_frontier(pts);
        const auto [lo, hi] = accuracy_span(f);
        if (hi - lo < 1e-3) continue;
        const double exact = alc(f, lo, hi);
        const double approx = oracle::alc_riemann(f.points, lo, hi, 1000000);
        EXPECT_NEAR(exact, approx, 1e-4 * exact);
        const double zero = alc(f, lo, 1.0, AboveMaxAccuracy::Zero);
        EXPECT_NEAR(zero, oracle::alc_riemann(f.points, lo, 1.0, 1000000, true), 1e-4 * zero);
    }
}

TEST(Alc, AddingPointsNeverLowersArea) {
    std::mt19937_64 rng(44);
    auto pts = random_points(rng, 200, false);
    const auto f = pareto_frontier(pts);
    const auto [lo, hi] = accuracy_span(f);
    double prev = alc(f, lo, hi);
    for (int k = 0; k < 100; ++k) {
        pts.push_back(random_points(rng, 1, false)[0]);
        const double now = alc(pareto_frontier(pts), lo, hi);
        EXPECT_GE(now, prev);
        prev = now;
    }
}

TEST(Speedup, ExamplesAndScaling) {
    std::mt19937_64 rng(45);
    const auto a = random_points(rng, 300, false);
    EXPECT_DOUBLE_EQ(speedup(a, a), 1.0);
    auto doubled = a;
    for (auto& p : doubled) p.throughput_fps *= 2;
    EXPECT_NEAR(speedup(doubled, a), 2.0, 1e-12);
    const auto b = random_points(rng, 300, false);
    const auto fa = pareto_frontier(a), fb = pareto_frontier(b);
    const double lo = std::max(accuracy_span(fa).first, accuracy_span(fb).first);
    const double hi = std::min(accuracy_span(fa).second, accuracy_span(fb).second);
    const double expect = oracle::alc_riemann(fa.points, lo, hi, 200000) / oracle::alc_riemann(fb.points, lo, hi, 200000);
    EXPECT_NEAR(speedup(a, b), expect, 1e-3 * expect);
    EXPECT_THROW(speedup(std::vector{pt(0.9, 1)}, std::vector{pt(0.5, 1)}), Error);
}

TEST(Select, WorkedExamples) {
    const auto f = pareto_frontier(std::vector{pt(0.95, 100, 1), pt(0.90, 500, 2), pt(0.80, 900, 3)});
    EXPECT_EQ(select(f, {0.05, std::nullopt}).cascade_id.value, 1u);
    EXPECT_EQ(select(f, {0.06, std::nullopt}).cascade_id.value, 2u);
    EXPECT_EQ(select(f, {0.0, std::nullopt}).cascade_id.value, 1u);
    EXPECT_EQ(select(f, {std::nullopt, 0.5}).cascade_id.value, 2u);
    EXPECT_EQ(select(f, {0.2, 0.5}).cascade_id.value, 3u);
    EXPECT_EQ(select_vs_reference(f, 0.85).cascade_id.value, 2u);
    EXPECT_EQ(select_vs_reference(f, 0.95).cascade_id.value, 1u);
    try {
        select_vs_reference(f, 0.99);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Infeasible);
    }
    EXPECT_THROW(select(f, {}), Error);
    EXPECT_THROW(select(f, {1.5, std::nullopt}), Error);
}

TEST(Select, RandomCasesMatchScan) {
    std::mt19937_64 rng(46);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 500; ++trial) {
        const auto f = pareto_frontier(random_points(rng, 1 + rng() % 200, trial % 2 == 0));
        std::optional<double> ua, ut;
        switch (trial % 3) {
            case 0: ua = u(rng) * 0.3; break;
            case 1: ut = u(rng) * 0.9; break;
            default: ua = u(rng) * 0.3, ut = u(rng) * 0.9;
        }
        const auto want = oracle::select_scan(f.points, ua, ut);
        if (!want) {
            EXPECT_THROW(select(f, {ua, ut}), Error);
            continue;
        }
        EXPECT_EQ(select(f, {ua, ut}), *want);
        const double ref = u(rng);
        std::optional<EvalPoint> by_ref;
        for (const auto& p : f.points)
            if (p.accuracy >= ref && (!by_ref || p.accuracy < by_ref->accuracy)) by_ref = p;
        if (by_ref)
            EXPECT_EQ(select_vs_reference(f, ref), *by_ref);
        else
            EXPECT_THROW(select_vs_reference(f, ref), Error);
    }
}

TEST(Select, ScaleEquivariance) {
    std::mt19937_64 rng(47);
    for (int trial = 0; trial < 50; ++trial) {
        auto pts = random_points(rng, 100, false);
        const auto f = pareto_frontier(pts);
        for (auto& p : pts) p.throughput_fps *= 3.5;
        const auto g = pareto_frontier(pts);
        const auto [lo, hi] = accuracy_span(f);
        if (hi > lo) {
            EXPECT_NEAR(alc(g, lo, hi), 3.5 * alc(f, lo, hi), 1e-9 * alc(g, lo, hi));
        }
        EXPECT_EQ(select(f, {0.1, std::nullopt}).cascade_id, select(g, {0.1, std::nullopt}).cascade_id);
    }
}
