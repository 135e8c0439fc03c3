#include <sstream>

#include <gtest/gtest.h>

#include "cascadeopt/experiments.hpp"
#include "oracles.hpp"

using namespace cascadeopt;

namespace {

GridConfig small_grid() {
    GridConfig g;
    g.arch = {{1, 4}, {32}, {32}};
    g.transforms = {{30, 30, ColorMode::FullRgb}, {30, 30, ColorMode::Gray},
                    {224, 224, ColorMode::FullRgb}, {224, 224, ColorMode::Gray}};
    g.precision_settings = {0.91, 0.95, 0.99};
    return g;
}

const ExperimentContext& small_context() {
    static const ExperimentContext ctx = [] {
        SyntheticSetup s;
        s.count = 800;
        s.grid = small_grid();
        return build_synthetic_context(s);
    }();
    return ctx;
}

std::size_t pool_size(const std::vector<ModelSpec>& models, const std::string& subset) {
    const auto keep = ablation_filter(subset, {224, 224, ColorMode::FullRgb});
    return static_cast<std::size_t>(std::count_if(models.begin(), models.end(), keep));
}

}  // namespace

TEST(Ablation, PoolSizesOnDefaultGrid) {
    const auto models = GridConfig{}.models();
    ASSERT_EQ(models.size(), 361u);
    EXPECT_EQ(pool_size(models, "None"), 18u + 1);
    EXPECT_EQ(pool_size(models, "Color Variations"), 18u * 5 + 1);
    EXPECT_EQ(pool_size(models, "Resizing"), 18u * 4 + 1);
    EXPECT_EQ(pool_size(models, "Full"), 361u);
    EXPECT_THROW(ablation_filter("Half", {}), Error);
}

TEST(Ablation, RowsAndNesting) {
    const auto& ctx = small_context();
    const auto rep = run_transform_ablation(ctx, Scenario::Camera, {2, 3, false});
    ASSERT_EQ(rep.rows.size(), 4u);
    EXPECT_EQ(rep.rows[0].subset, "None");
    EXPECT_EQ(rep.rows[0].grid_models, 2u);
    EXPECT_EQ(rep.rows[3].grid_models, 8u);
    // nested pools: more transforms never shrink the area under the frontier
    EXPECT_GE(rep.row("Full").alc, rep.row("Resizing").alc);
    EXPECT_GE(rep.row("Full").alc, rep.row("Color Variations").alc);
    EXPECT_GE(rep.row("Resizing").alc, rep.row("None").alc);
    EXPECT_GE(rep.row("Color Variations").alc, rep.row("None").alc);
    for (const auto& r : rep.rows) EXPECT_NEAR(r.average_throughput, r.alc / (rep.a_hi - rep.a_lo), 1e-9 * r.alc);
    std::ostringstream csv;
    write_ablation_csv(rep, csv);
    const std::string text = csv.str();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
    EXPECT_GE(summary_json(rep)["full_over_none"].get<double>(), 1.0);
}

TEST(Ablation, FullPoolAlcMatchesRiemannOracle) {
    const auto& ctx = small_context();
    ModelPool pool(ctx, [](const ModelSpec&) { return true; });
    const auto r = evaluate_pool(ctx, pool, "Full", {2, 3, false}, Scenario::Archive);
    const double exact = alc(r.frontier, r.min_accuracy, r.max_accuracy);
    EXPECT_NEAR(exact, oracle::alc_riemann(r.frontier.points, r.min_accuracy, r.max_accuracy, 200000), 1e-4 * exact);
}

TEST(ScenarioComparison, AwareNeverLosesAndInferOnlyTies) {
    const auto& ctx = small_context();
    ModelPool pool(ctx, [](const ModelSpec&) { return true; });
    const CascadeSpace space(pool.models, pool.calibrated, {3, 3, false});
    const CatalogEvaluator ev(pool.table, ctx.eval_labels, pool.models, ctx.profile);
    const auto summary = summarize_catalog(space, ev);
    const auto rows = run_scenario_comparison(summary, space, ev, default_loss_levels());
    ASSERT_EQ(rows.size(), 4u * default_loss_levels().size());
    for (const auto& r : rows) {
        EXPECT_GE(r.aware_fps, r.oblivious_fps) << to_string(r.scenario) << " " << r.loss;
        if (r.scenario == Scenario::InferOnly) {
            EXPECT_EQ(r.aware_fps, r.oblivious_fps);
            EXPECT_EQ(r.aware_id, r.oblivious_id);
        }
    }
    // the recost callback reproduces the point's own throughput on its own scenario
    const auto& f = summary.in(Scenario::Camera);
    for (const auto& p : f.points) EXPECT_EQ(ev.evaluate(space.at(p.ordinal)).throughput(Scenario::Camera), p.throughput_fps);
}

TEST(ScenarioComparison, SummaryFrontiersEqualBruteForce) {
    const auto& ctx = small_context();
    ModelPool pool(ctx, [](const ModelSpec&) { return true; });
    const CascadeSpace space(pool.models, pool.calibrated, {2, 3, false});
    const CatalogEvaluator ev(pool.table, ctx.eval_labels, pool.models, ctx.profile);
    const auto summary = summarize_catalog(space, ev, 2);
    std::array<std::vector<EvalPoint>, 4> pts;
    evaluate_catalog(space, ev, [&](const CatalogRecord& r) {
        for (auto s : kAllScenarios) pts[static_cast<std::size_t>(s)].push_back(to_eval_point(r, s));
    });
    for (auto s : kAllScenarios) EXPECT_EQ(summary.in(s).points, oracle::frontier(pts[static_cast<std::size_t>(s)]));
}

TEST(DepthStudy, CatalogsGrowAndAreaNeverShrinks) {
    const auto& ctx = small_context();
    const auto rep = run_depth_study(ctx, [](const ModelSpec&) { return true; }, Scenario::Camera,
                                     default_depth_configs(true));
    ASSERT_EQ(rep.rows.size(), 5u);
    EXPECT_EQ(rep.rows[0].alc_gain, 0.0);
    for (std::size_t i = 1; i < rep.rows.size(); ++i) {
        EXPECT_GT(rep.rows[i].catalog_size, rep.rows[i - 1].catalog_size);
        EXPECT_GE(rep.rows[i].alc, rep.rows[i - 1].alc * (1 - 1e-12));
    }
    // 9 models with 3 settings: 9, then 27 entries x 8 non-self terminals, ...
    EXPECT_EQ(rep.rows[0].catalog_size, 9u);
    EXPECT_EQ(rep.rows[2].catalog_size, 9u + 27 * 8);
    std::ostringstream csv;
    write_depth_csv(rep, csv);
    EXPECT_NE(csv.str().find("2 level + anchor"), std::string::npos);
}

TEST(DepthStudy, RangeIsIntersectionOfSpans) {
    auto mk = [](const std::string& name, double lo, double hi) {
        PoolResult p;
        p.name = name;
        p.frontier = pareto_frontier(std::vector<EvalPoint>{{{1}, hi, 10, 1, 0}, {{2}, lo, 20, 1, 1}});
        p.min_accuracy = lo;
        p.max_accuracy = hi;
        return p;
    };
    const auto rep = depth_report(Scenario::Camera, {mk("a", 0.7, 0.9), mk("b", 0.75, 0.95)});
    EXPECT_DOUBLE_EQ(rep.a_lo, 0.75);
    EXPECT_DOUBLE_EQ(rep.a_hi, 0.9);
    EXPECT_THROW(depth_report(Scenario::Camera, {mk("a", 0.1, 0.2), mk("b", 0.3, 0.4)}), Error);
}

TEST(Experiments, DeterministicContext) {
    SyntheticSetup s;
    s.count = 200;
    s.grid = small_grid();
    const auto a = build_synthetic_context(s);
    const auto b = build_synthetic_context(s);
    EXPECT_EQ(a.eval_scores, b.eval_scores);
    EXPECT_EQ(a.calibrated, b.calibrated);
    EXPECT_EQ(a.profile, b.profile);
    EXPECT_EQ(a.calibrated.size(), 9u * 3);
}
