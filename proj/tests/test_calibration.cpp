#include <random>

#include <gtest/gtest.h>

#include "cascadeopt/calibration.hpp"
#include "oracles.hpp"

using namespace cascadeopt;

namespace {
constexpr Label P = Label::Positive, N = Label::Negative;

std::vector<Label> random_labels(std::mt19937_64& rng, std::size_t n) {
    std::vector<Label> out(n);
    for (auto& l : out) l = rng() & 1 ? P : N;
    return out;
}
}  // namespace

TEST(Calibration, PerfectlySeparable) {
    const std::vector<double> s{0.1, 0.1, 0.9, 0.9};
    const std::vector<Label> y{N, N, P, P};
    const auto t = calibrate_thresholds(s, y, 0.95, 0.01);
    EXPECT_DOUBLE_EQ(t.p_low, 0.10);
    EXPECT_DOUBLE_EQ(t.p_high, 0.90);
    EXPECT_DOUBLE_EQ(decision_stats(s, y, t).coverage(), 1.0);
}

TEST(Calibration, OneSidedDegenerate) {
    const std::vector<double> s(6, 0.99);
    const std::vector<Label> y(6, P);
    const auto t = calibrate_thresholds(s, y, 0.95, 0.01);
    EXPECT_DOUBLE_EQ(t.p_low, 0.0);
    EXPECT_DOUBLE_EQ(t.p_high, 0.99);
    const auto st = decision_stats(s, y, t);
    EXPECT_EQ(st.decided_pos, 6u);
    EXPECT_EQ(st.decided_neg, 0u);
}

TEST(Calibration, InfeasibleGivesSentinel) {
    // every score identical with mixed labels: no pair reaches 0.9 on any side
    const std::vector<double> s(10, 0.5);
    std::vector<Label> y(10, N);
    for (int i = 0; i < 5; ++i) y[static_cast<std::size_t>(i)] = P;
    const auto t = calibrate_thresholds(s, y, 0.9, 0.05);
    EXPECT_TRUE(t.never_confident());
    EXPECT_EQ(decide(0.0, t), Decision::Uncertain);
    EXPECT_EQ(decide(1.0, t), Decision::Uncertain);
}

TEST(Calibration, FortyScoresWithCrossoversMatchExhaustiveSearch) {
    // 20 negatives at 0.02..0.40 and 20 positives at 0.60..0.98 with three
    // crossovers swapped into the other side
    std::vector<double> s;
    std::vector<Label> y;
    for (int i = 1; i <= 20; ++i) {
        s.push_back(0.02 * i);
        y.push_back(N);
        s.push_back(0.58 + 0.02 * i);
        y.push_back(P);
    }
    y[2 * 18] = P;      // 0.38 is positive
    y[2 * 19] = P;      // 0.40 is positive
    y[2 * 0 + 1] = N;   // 0.60 is negative
    const auto t = calibrate_thresholds(s, y, 0.9, 0.05);
    const auto o = oracle::calibrate(s, y, 0.9, 20);
    EXPECT_EQ(t.p_low, o.p_low);
    EXPECT_EQ(t.p_high, o.p_high);
    EXPECT_FALSE(t.never_confident());
}

TEST(Calibration, RandomSetsMatchExhaustiveSearch) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 150; ++trial) {
        const std::size_t n = 1 + rng() % 80;
        const int grid_n = trial % 3 == 0 ? 20 : (trial % 3 == 1 ? 10 : 25);
        const auto y = random_labels(rng, n);
        std::vector<double> s(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double lean = y[i] == P ? 0.25 : -0.25;
            s[i] = std::clamp(0.5 + lean + (u(rng) - 0.5) * 0.9, 0.0, 1.0);
            if (rng() % 4 == 0) s[i] = static_cast<double>(rng() % (grid_n + 1)) / grid_n;  // on-grid ties
        }
        const double target = 0.7 + 0.05 * static_cast<double>(trial % 7);
        const auto t = calibrate_thresholds(s, y, target, 1.0 / grid_n);
        const auto o = oracle::calibrate(s, y, target, grid_n);
        ASSERT_EQ(t.p_low, o.p_low) << "trial " << trial;
        ASSERT_EQ(t.p_high, o.p_high) << "trial " << trial;
        ASSERT_LE(t.p_low, t.p_high);
        if (!t.never_confident()) {
            const auto st = decision_stats(s, y, t);
            EXPECT_GE(st.pos_precision(), target);
            EXPECT_GE(st.neg_precision(), target);
        }
    }
}

TEST(Calibration, PooledAndRecallModesDiffer) {
    // pooled precision lets a weak negative side ride on a strong positive side
    std::vector<double> s{0.1, 0.1, 0.1, 0.9, 0.9, 0.9, 0.9, 0.9, 0.9, 0.9};
    std::vector<Label> y{N, N, P, P, P, P, P, P, P, P};
    const auto per_side = calibrate_thresholds(s, y, 0.85, 0.05);
    const auto pooled = calibrate_thresholds(s, y, 0.85, 0.05, {PrecisionMode::Pooled, CalibrationObjective::Coverage});
    EXPECT_EQ(decision_stats(s, y, per_side).decided_neg, 0u);
    EXPECT_EQ(decision_stats(s, y, pooled).decided_neg, 3u);
    const auto recall =
        calibrate_thresholds(s, y, 0.85, 0.05, {PrecisionMode::PerSide, CalibrationObjective::PositiveRecall});
    EXPECT_EQ(decision_stats(s, y, recall).true_pos, 7u);
}

TEST(Calibration, BoundaryRules) {
    const ThresholdPair t{0.1, 0.9, 0.9};
    EXPECT_EQ(decide(0.95, t), Decision::DecidedPos);
    EXPECT_EQ(decide(0.9, t), Decision::DecidedPos);
    EXPECT_EQ(decide(0.1, t), Decision::DecidedNeg);
    EXPECT_EQ(decide(0.5, t), Decision::Uncertain);
    const ThresholdPair same{0.4, 0.4, 0.9};
    EXPECT_EQ(decide(0.4, same), Decision::DecidedNeg);  // negative side first
}

TEST(Calibration, ArgumentValidation) {
    const std::vector<double> s{0.2};
    const std::vector<Label> y{N};
    EXPECT_THROW(calibrate_thresholds(s, y, 0.9, 0.0), Error);
    EXPECT_THROW(calibrate_thresholds(s, y, 0.4, 0.1), Error);
    EXPECT_THROW(calibrate_thresholds(std::vector<double>{1.2}, y, 0.9, 0.1), Error);
    EXPECT_THROW(calibrate_thresholds(std::vector<double>{}, std::vector<Label>{}, 0.9, 0.1), Error);
    EXPECT_EQ(threshold_grid(0.1).size(), 11u);
    EXPECT_EQ(threshold_grid(0.3), (std::vector<double>{0.0, 0.3, 0.6, 0.8999999999999999, 1.0}));
}

TEST(CalibrateAll, CountsOrderAndStats) {
    std::mt19937_64 rng(23);
    auto pool = oracle::random_pool(rng, 6, 120, 1);
    const std::vector<double> settings{0.91, 0.93, 0.95, 0.97, 0.99};
    const auto all = calibrate_all(pool.models, pool.eval, pool.labels, settings, 0.01);
    ASSERT_EQ(all.size(), pool.models.size() * settings.size());
    for (std::size_t i = 0; i < all.size(); ++i) {
        const auto& c = all[i];
        EXPECT_EQ(c.model_id, pool.models[i / settings.size()].model_id);
        EXPECT_EQ(c.threshold.target_precision, settings[i % settings.size()]);
        // recompute from raw scores
        const auto row = pool.eval.model_row(c.model_id);
        std::vector<double> scores(pool.eval.row(row), pool.eval.row(row) + pool.eval.image_count());
        const auto o = oracle::calibrate(scores, pool.labels, c.threshold.target_precision, 100);
        EXPECT_EQ(c.threshold.p_low, o.p_low);
        EXPECT_EQ(c.threshold.p_high, o.p_high);
        const auto st = decision_stats(scores, pool.labels, c.threshold);
        EXPECT_EQ(c.coverage, st.coverage());
        EXPECT_EQ(c.pos_precision, st.pos_precision());
    }
    const auto one = calibrate_all({pool.models[0]}, pool.eval, pool.labels, {0.9}, 0.01);
    ASSERT_EQ(one.size(), 1u);
    const auto row = pool.eval.model_row(pool.models[0].model_id);
    EXPECT_EQ(one[0].threshold, calibrate_thresholds({pool.eval.row(row), pool.eval.image_count()}, pool.labels, 0.9, 0.01));
}

TEST(CalibrateAll, JsonRoundTrip) {
    oracle::TempDir dir("calib");
    std::mt19937_64 rng(5);
    auto pool = oracle::random_pool(rng, 3, 30, 2);
    const auto all = calibrate_all(pool.models, pool.eval, pool.labels, {0.9, 0.95}, 0.05);
    write_calibrated(all, dir / "c.json");
    EXPECT_EQ(read_calibrated(dir / "c.json"), all);
}
