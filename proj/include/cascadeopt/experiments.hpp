#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cascadeopt/calibration.hpp"
#include "cascadeopt/cascade.hpp"
#include "cascadeopt/config.hpp"
#include "cascadeopt/corpus.hpp"
#include "cascadeopt/costs.hpp"
#include "cascadeopt/evaluator.hpp"
#include "cascadeopt/models.hpp"
#include "cascadeopt/pareto.hpp"

namespace cascadeopt {

/// Scored, calibrated and costed model pool; the input to every experiment.
struct ExperimentContext {
    std::vector<ModelSpec> models;
    ScoreMatrix config_scores;
    ScoreMatrix eval_scores;
    std::vector<Label> config_labels;
    std::vector<Label> eval_labels;
    std::vector<CalibratedModel> calibrated;
    CostProfile profile;
    GridConfig grid;
};

inline ExperimentContext build_context(const GridConfig& grid, const DatasetSplits& splits, const ScorerBackend& backend,
                                       std::optional<CostProfile> profile = std::nullopt) {
    ExperimentContext ctx;
    ctx.grid = grid;
    ctx.models = grid.models();
    ctx.config_scores = score_dataset(backend, ctx.models, splits.config);
    ctx.eval_scores = score_dataset(backend, ctx.models, splits.eval);
    ctx.config_labels = labels_for(ctx.config_scores, splits.config);
    ctx.eval_labels = labels_for(ctx.eval_scores, splits.eval);
    ctx.calibrated =
        calibrate_all(ctx.models, ctx.config_scores, ctx.config_labels, grid.precision_settings, grid.grid_step);
    ctx.profile = profile ? *profile : profile_costs_synthetic(ctx.models, grid.cost_constants, grid.full_size);
    return ctx;
}

/// The default desk-scale setup: a 4000-image synthetic corpus split
/// 50/25/25, scored by the synthetic backend, costed by the synthetic profile.
struct SyntheticSetup {
    std::uint64_t corpus_seed = 1;
    int count = 4000;
    int width = 32;
    int height = 32;
    double positive_fraction = 0.5;
    double train_fraction = 0.5;
    double config_fraction = 0.25;
    double eval_fraction = 0.25;
    GridConfig grid;
};

inline ExperimentContext build_synthetic_context(const SyntheticSetup& setup) {
    const auto corpus =
        generate_synthetic_corpus(setup.corpus_seed, setup.count, setup.width, setup.height, setup.positive_fraction);
    const auto splits = split_dataset(
        corpus, SplitSpec{setup.train_fraction, setup.config_fraction, setup.eval_fraction, setup.grid.split_seed});
    SyntheticScorer backend(setup.grid.noise_seed);
    return build_context(setup.grid, splits, backend);
}

/// A sub-pool of the context's models with its own outcome table. Not movable
/// once an evaluator refers to its table, so experiments build pools in place.
struct ModelPool {
    std::vector<ModelSpec> models;
    std::vector<CalibratedModel> calibrated;
    OutcomeTable table;

    ModelPool(const ExperimentContext& ctx, const std::function<bool(const ModelSpec&)>& keep) {
        for (const auto& m : ctx.models)
            if (keep(m)) models.push_back(m);
        require(!models.empty(), "model pool is empty");
        for (const auto& c : ctx.calibrated)
            for (const auto& m : models)
                if (m.model_id == c.model_id) {
                    calibrated.push_back(c);
                    break;
                }
        table = precompute_outcomes(ctx.eval_scores, models, calibrated);
    }
    ModelPool(const ModelPool&) = delete;
    ModelPool& operator=(const ModelPool&) = delete;

    std::size_t grid_model_count() const {
        return static_cast<std::size_t>(std::count_if(models.begin(), models.end(), [](const ModelSpec& m) { return !m.is_anchor; }));
    }
};

// ---------------------------------------------------------------------------
// Transform ablation
// ---------------------------------------------------------------------------

/// One evaluated catalog reduced to what the reports need.
struct PoolResult {
    std::string name;
    std::size_t grid_models = 0;
    std::uint64_t catalog_size = 0;
    ParetoFrontier frontier;
    double min_accuracy = 0;
    double max_accuracy = 0;
};

inline PoolResult evaluate_pool(const ExperimentContext& ctx, const ModelPool& pool, const std::string& name,
                                const EnumerationOptions& enumeration, Scenario scenario) {
    CascadeSpace space(pool.models, pool.calibrated, enumeration);
    CatalogEvaluator ev(pool.table, ctx.eval_labels, pool.models, ctx.profile);
    const auto summary = summarize_catalog(space, ev);
    return {name, pool.grid_model_count(), summary.cascade_count, summary.in(scenario), summary.min_accuracy,
            summary.max_accuracy};
}

struct AblationRow {
    std::string subset;
    std::size_t grid_models = 0;
    std::uint64_t catalog_size = 0;
    double alc = 0;
    double average_throughput = 0;
};

struct AblationReport {
    Scenario scenario = Scenario::Camera;
    double a_lo = 0, a_hi = 0;
    std::vector<AblationRow> rows;  // None, Color Variations, Resizing, Full

    const AblationRow& row(const std::string& subset) const {
        for (const auto& r : rows)
            if (r.subset == subset) return r;
        fail("no ablation row '" + subset + "'");
    }
};

inline const std::vector<std::string>& ablation_subset_names() {
    static const std::vector<std::string> names{"None", "Color Variations", "Resizing", "Full"};
    return names;
}

/// Average throughput of every pool over the Full pool's accuracy range. A
/// pool whose cascades never reach an accuracy contributes zero there.
inline AblationReport ablation_report(Scenario scenario, const std::vector<PoolResult>& pools) {
    const PoolResult* full = nullptr;
    for (const auto& p : pools)
        if (p.name == "Full") full = &p;
    require(full != nullptr, "ablation: no 'Full' pool");
    AblationReport rep;
    rep.scenario = scenario;
    rep.a_lo = full->min_accuracy;
    rep.a_hi = full->max_accuracy;
    require(rep.a_lo < rep.a_hi, "ablation: Full catalog has a degenerate accuracy range");
    for (const auto& p : pools) {
        AblationRow row;
        row.subset = p.name;
        row.grid_models = p.grid_models;
        row.catalog_size = p.catalog_size;
        row.alc = alc(p.frontier, rep.a_lo, rep.a_hi, AboveMaxAccuracy::Zero);
        row.average_throughput = row.alc / (rep.a_hi - rep.a_lo);
        rep.rows.push_back(row);
    }
    return rep;
}

/// Model filters for the four ablation pools: full-size colour only (None),
/// full size in every colour mode, every size in full colour, and everything.
/// The anchor joins every pool.
inline std::function<bool(const ModelSpec&)> ablation_filter(const std::string& subset, const TransformSpec& full) {
    const auto full_res = [full](const ModelSpec& m) {
        return m.transform.out_width == full.out_width && m.transform.out_height == full.out_height;
    };
    if (subset == "None")
        return [=](const ModelSpec& m) { return m.is_anchor || (full_res(m) && m.transform.color_mode == full.color_mode); };
    if (subset == "Color Variations") return [=](const ModelSpec& m) { return m.is_anchor || full_res(m); };
    if (subset == "Resizing")
        return [=](const ModelSpec& m) { return m.is_anchor || m.transform.color_mode == full.color_mode; };
    if (subset == "Full") return [](const ModelSpec&) { return true; };
    fail("unknown ablation subset '" + subset + "'");
}

inline AblationReport run_transform_ablation(const ExperimentContext& ctx, Scenario scenario,
                                             EnumerationOptions enumeration = {}) {
    std::vector<PoolResult> pools;
    for (const auto& name : ablation_subset_names()) {
        ModelPool pool(ctx, ablation_filter(name, ctx.grid.full_size));
        pools.push_back(evaluate_pool(ctx, pool, name, enumeration, scenario));
    }
    return ablation_report(scenario, pools);
}

// ---------------------------------------------------------------------------
// Scenario-aware vs scenario-oblivious selection
// ---------------------------------------------------------------------------

struct ScenarioRow {
    Scenario scenario = Scenario::InferOnly;
    double loss = 0;
    double oblivious_fps = 0;
    double aware_fps = 0;
    CascadeId oblivious_id;
    CascadeId aware_id;
};

inline const std::vector<double>& default_loss_levels() {
    static const std::vector<double> levels{0.0, 0.02, 0.05, 0.10};
    return levels;
}

/// Oblivious: pick on the inference-only frontier, then re-cost that cascade
/// under the target scenario with recost(point, scenario) -> fps. Aware: pick
/// on the target scenario's frontier. Both use an accuracy-loss bound.
template <typename Recost>
std::vector<ScenarioRow> scenario_rows(const std::array<ParetoFrontier, kAllScenarios.size()>& frontiers,
                                       const std::vector<double>& losses, Recost&& recost) {
    std::vector<ScenarioRow> rows;
    for (auto scenario : kAllScenarios) {
        for (double loss : losses) {
            SelectionConstraint c{loss, std::nullopt};
            const auto oblivious = select(frontiers[static_cast<std::size_t>(Scenario::InferOnly)], c);
            const auto aware = select(frontiers[static_cast<std::size_t>(scenario)], c);
            rows.push_back({scenario, loss, recost(oblivious, scenario), aware.throughput_fps, oblivious.cascade_id,
                            aware.cascade_id});
        }
    }
    return rows;
}

inline std::vector<ScenarioRow> run_scenario_comparison(const CatalogSummary& summary, const CascadeSpace& space,
                                                        const CatalogEvaluator& evaluator,
                                                        const std::vector<double>& losses) {
    return scenario_rows(summary.frontier, losses, [&](const EvalPoint& p, Scenario s) {
        return evaluator.evaluate(space.at(p.ordinal)).throughput(s);
    });
}

// ---------------------------------------------------------------------------
// Cascade depth study
// ---------------------------------------------------------------------------

struct DepthConfig {
    std::string name;
    EnumerationOptions enumeration;
};

/// Nested catalogs, each a superset of the previous one.
inline std::vector<DepthConfig> default_depth_configs(bool include_full_depth3) {
    std::vector<DepthConfig> out = {
        {"1 level", {1, 3, false}},
        {"1 level + anchor", {2, 2, false}},
        {"2 level", {2, 3, false}},
        {"2 level + anchor", {3, 3, false}},
    };
    if (include_full_depth3) out.push_back({"3 level", {3, 4, false}});
    return out;
}

struct DepthRow {
    std::string name;
    std::uint64_t catalog_size = 0;
    double alc = 0;
    double average_throughput = 0;
    /// Relative ALC change against the previous configuration (0 for the first).
    double alc_gain = 0;
};

struct DepthReport {
    Scenario scenario = Scenario::Camera;
    double a_lo = 0, a_hi = 0;
    std::vector<DepthRow> rows;
};

/// ALC of every configuration over the smallest of the configurations'
/// accuracy ranges, i.e. the intersection of all their spans.
inline DepthReport depth_report(Scenario scenario, const std::vector<PoolResult>& configs) {
    require(!configs.empty(), "depth study: no configurations");
    DepthReport rep;
    rep.scenario = scenario;
    rep.a_lo = 0.0;
    rep.a_hi = 1.0;
    for (const auto& c : configs) {
        rep.a_lo = std::max(rep.a_lo, c.min_accuracy);
        rep.a_hi = std::min(rep.a_hi, c.max_accuracy);
    }
    require(rep.a_lo < rep.a_hi, "depth study: the configurations share no accuracy range");
    double prev = 0;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        DepthRow row;
        row.name = configs[i].name;
        row.catalog_size = configs[i].catalog_size;
        row.alc = alc(configs[i].frontier, rep.a_lo, rep.a_hi);
        row.average_throughput = row.alc / (rep.a_hi - rep.a_lo);
        row.alc_gain = i == 0 ? 0.0 : (row.alc - prev) / prev;
        prev = row.alc;
        rep.rows.push_back(row);
    }
    return rep;
}

inline DepthReport run_depth_study(const ExperimentContext& ctx, const std::function<bool(const ModelSpec&)>& keep,
                                   Scenario scenario, const std::vector<DepthConfig>& configs) {
    ModelPool pool(ctx, keep);
    std::vector<PoolResult> results;
    for (const auto& cfg : configs) results.push_back(evaluate_pool(ctx, pool, cfg.name, cfg.enumeration, scenario));
    return depth_report(scenario, results);
}

// ---------------------------------------------------------------------------
// Report output
// ---------------------------------------------------------------------------

inline void write_ablation_csv(const AblationReport& r, std::ostream& out) {
    out << "subset,grid_models,catalog_size,alc,average_throughput_fps,scenario,accuracy_lo,accuracy_hi\n";
    for (const auto& row : r.rows)
        out << row.subset << ',' << row.grid_models << ',' << row.catalog_size << ',' << format_double(row.alc) << ','
            << format_double(row.average_throughput) << ',' << to_string(r.scenario) << ',' << format_double(r.a_lo)
            << ',' << format_double(r.a_hi) << '\n';
}

inline nlohmann::json summary_json(const AblationReport& r) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"subset", row.subset}, {"grid_models", row.grid_models}, {"catalog_size", row.catalog_size},
                        {"average_throughput_fps", row.average_throughput}});
    const double none = r.row("None").average_throughput;
    return {{"experiment", "ablation"},     {"scenario", std::string(to_string(r.scenario))},
            {"accuracy_range", {r.a_lo, r.a_hi}}, {"rows", rows},
            {"full_over_none", none > 0 ? r.row("Full").average_throughput / none : 0.0}};
}

inline void write_scenario_csv(const std::vector<ScenarioRow>& rows, std::ostream& out) {
    out << "scenario,loss,oblivious_fps,aware_fps,improvement,oblivious_cascade,aware_cascade\n";
    for (const auto& r : rows)
        out << to_string(r.scenario) << ',' << format_double(r.loss) << ',' << format_double(r.oblivious_fps) << ','
            << format_double(r.aware_fps) << ',' << format_double(r.aware_fps / r.oblivious_fps - 1.0) << ','
            << r.oblivious_id.str() << ',' << r.aware_id.str() << '\n';
}

inline nlohmann::json summary_json(const std::vector<ScenarioRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    std::size_t strict = 0;
    for (const auto& r : rows) {
        arr.push_back({{"scenario", std::string(to_string(r.scenario))}, {"loss", r.loss},
                       {"oblivious_fps", r.oblivious_fps}, {"aware_fps", r.aware_fps}});
        strict += r.aware_fps > r.oblivious_fps;
    }
    return {{"experiment", "scenario"}, {"rows", arr}, {"strict_improvements", strict}};
}

inline void write_depth_csv(const DepthReport& r, std::ostream& out) {
    out << "configuration,catalog_size,alc,average_throughput_fps,alc_gain,scenario,accuracy_lo,accuracy_hi\n";
    for (const auto& row : r.rows)
        out << row.name << ',' << row.catalog_size << ',' << format_double(row.alc) << ','
            << format_double(row.average_throughput) << ',' << format_double(row.alc_gain) << ',' << to_string(r.scenario)
            << ',' << format_double(r.a_lo) << ',' << format_double(r.a_hi) << '\n';
}

inline nlohmann::json summary_json(const DepthReport& r) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"configuration", row.name}, {"catalog_size", row.catalog_size}, {"alc", row.alc},
                        {"alc_gain", row.alc_gain}});
    return {{"experiment", "depth"}, {"scenario", std::string(to_string(r.scenario))},
            {"accuracy_range", {r.a_lo, r.a_hi}}, {"rows", rows}};
}

}  // namespace cascadeopt
