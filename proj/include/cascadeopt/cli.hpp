#pragma once

// Command-line front end. Every stage reads its inputs from disk and writes
// its outputs to disk, so any stage can be re-run alone.
//
//   gen-corpus  synthetic corpus -> manifest.json + PGM/PPM images
//   score       corpus + grid config -> config/eval score matrices, models.json,
//               splits.json (split membership and labels), profile.json
//   calibrate   config score matrix -> calibrated thresholds JSON
//   evaluate    eval score matrix + thresholds + profile -> cascade catalog CSV
//   frontier    catalog -> Pareto frontier CSV
//   select      frontier + constraints -> chosen cascade as JSON on stdout
//   report      catalogs -> experiment CSV + JSON summary
//
// Exit codes: 0 success, 2 usage or validation error, 3 infeasible selection,
// 4 I/O error.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cascadeopt/calibration.hpp"
#include "cascadeopt/cascade.hpp"
#include "cascadeopt/catalog_io.hpp"
#include "cascadeopt/common.hpp"
#include "cascadeopt/config.hpp"
#include "cascadeopt/corpus.hpp"
#include "cascadeopt/costs.hpp"
#include "cascadeopt/evaluator.hpp"
#include "cascadeopt/experiments.hpp"
#include "cascadeopt/models.hpp"
#include "cascadeopt/pareto.hpp"
#include "cascadeopt/score_matrix.hpp"

namespace cascadeopt {

inline int exit_code(ErrorKind k) {
    switch (k) {
        case ErrorKind::Validation: return 2;
        case ErrorKind::Infeasible: return 3;
        case ErrorKind::Io: return 4;
    }
    return 2;
}

namespace cli_detail {

namespace fs = std::filesystem;

inline std::pair<int, int> parse_size(const std::string& s) {
    const auto x = s.find('x');
    int w = 0, h = 0;
    if (x == std::string::npos || !parse_int(std::string_view(s).substr(0, x), w) ||
        !parse_int(std::string_view(s).substr(x + 1), h) || w <= 0 || h <= 0)
        fail("invalid size '" + s + "' (expected WxH with positive integers)");
    return {w, h};
}

inline std::vector<double> parse_double_list(const std::string& s, const char* what) {
    std::vector<double> out;
    for (auto cell : split_view(s, ',')) {
        double v = 0;
        if (!parse_double(trim(cell), v)) fail(std::string("invalid ") + what + " list '" + s + "'");
        out.push_back(v);
    }
    return out;
}

inline fs::path sibling(const fs::path& of, const std::string& name) { return of.parent_path() / name; }

inline void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail_io("cannot create directory " + dir.string() + ": " + ec.message());
}

inline std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) ensure_dir(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) fail_io("cannot write " + path.string());
    return out;
}

inline void write_json(const nlohmann::json& j, const fs::path& path) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

inline fs::path manifest_path(const fs::path& corpus) {
    return fs::is_directory(corpus) ? corpus / "manifest.json" : corpus;
}

/// Pools the evaluate and report stages can restrict a catalog to.
inline std::string pool_subset_name(const std::string& pool) {
    if (pool == "full") return "Full";
    if (pool == "none") return "None";
    if (pool == "color") return "Color Variations";
    if (pool == "resize") return "Resizing";
    fail("unknown pool '" + pool + "' (expected full, none, color or resize)");
}

// ---------------------------------------------------------------------------

struct GenCorpusArgs {
    std::uint64_t seed = 1;
    int count = 4000;
    std::string size = "32x32";
    double pos_frac = 0.5;
    std::string out;
};

inline void gen_corpus(const GenCorpusArgs& a, std::ostream& out) {
    const auto [w, h] = parse_size(a.size);
    require(a.count > 0, "--count must be positive");
    require(a.pos_frac >= 0.0 && a.pos_frac <= 1.0, "--pos-frac must lie in [0,1]");
    const auto ds = generate_synthetic_corpus(a.seed, a.count, w, h, a.pos_frac);
    const auto manifest = write_corpus(ds, a.out);
    std::size_t positives = 0;
    for (const auto& img : ds.images) positives += is_positive(img.label);
    out << nlohmann::json{{"name", ds.name},
                          {"images", ds.size()},
                          {"positives", positives},
                          {"width", w},
                          {"height", h},
                          {"manifest", manifest.string()}}
               .dump()
        << '\n';
}

struct ScoreArgs {
    std::string corpus;
    std::string splits = "0.5,0.25,0.25";
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> split_seed;
    std::string backend = "synthetic";
    std::vector<std::string> score_files;
    std::string grid;
    std::string profile = "synthetic";
    int profile_reps = 3;
    int profile_sample = 50;
    std::string out;
};

inline void score(const ScoreArgs& a, std::ostream& out) {
    GridConfig grid = a.grid.empty() ? GridConfig{} : read_grid_config(a.grid);
    if (a.seed) grid.noise_seed = *a.seed;
    if (a.split_seed) grid.split_seed = *a.split_seed;
    const auto fractions = parse_double_list(a.splits, "split fraction");
    require(fractions.size() == 3, "--splits needs three fractions (train,config,eval)");

    std::unique_ptr<ScorerBackend> backend;
    if (a.backend == "synthetic") {
        backend = std::make_unique<SyntheticScorer>(grid.noise_seed);
    } else if (a.backend == "file") {
        require(!a.score_files.empty(), "--backend file needs --score-files");
        std::vector<ScoreMatrix> sources;
        for (const auto& f : a.score_files) {
            require(fs::exists(f), "score file " + f + " does not exist");
            sources.push_back(read_score_matrix(fs::path(f)));
        }
        backend = std::make_unique<FileScorer>(std::move(sources));
    } else {
        fail("unknown backend '" + a.backend + "' (expected synthetic or file)");
    }
    require(a.profile == "synthetic" || a.profile == "measured", "--profile must be synthetic or measured");

    const auto corpus = load_corpus(manifest_path(a.corpus));
    const auto splits = split_dataset(corpus, SplitSpec{fractions[0], fractions[1], fractions[2], grid.split_seed});
    const auto models = grid.models();
    const auto config_scores = score_dataset(*backend, models, splits.config);
    const auto eval_scores = score_dataset(*backend, models, splits.eval);

    CostProfile profile;
    if (a.profile == "synthetic") {
        profile = profile_costs_synthetic(models, grid.cost_constants, grid.full_size);
    } else {
        require(a.profile_sample > 0, "--profile-sample must be positive");
        LabeledDataset sample{splits.config.name, {}};
        for (const auto& img : splits.config.images) {
            if (sample.images.size() >= static_cast<std::size_t>(a.profile_sample)) break;
            sample.images.push_back(img);
        }
        profile = profile_costs_measured(*backend, models, sample, a.profile_reps, fs::path(a.out) / "profile_scratch");
        std::error_code ec;
        fs::remove_all(fs::path(a.out) / "profile_scratch", ec);
    }

    const fs::path dir = a.out;
    ensure_dir(dir);
    write_score_matrix(config_scores, dir / "config_scores.csv");
    write_score_matrix(eval_scores, dir / "eval_scores.csv");
    write_models(models, dir / "models.json");
    write_split_labels(splits, dir / "splits.json");
    write_profile(profile, dir / "profile.json");
    out << nlohmann::json{{"models", models.size()},
                          {"train_images", splits.train.size()},
                          {"config_images", splits.config.size()},
                          {"eval_images", splits.eval.size()},
                          {"out", dir.string()}}
               .dump()
        << '\n';
}

struct CalibrateArgs {
    std::string scores;
    std::string precisions = "0.91,0.93,0.95,0.97,0.99";
    double step = 0.01;
    std::string labels;
    std::string precision_mode = "per-side";
    std::string objective = "coverage";
    std::string out;
};

inline void calibrate(const CalibrateArgs& a, std::ostream& out) {
    require(a.step > 0.0 && a.step <= 1.0, "--step must lie in (0, 1]");
    const auto precisions = parse_double_list(a.precisions, "precision");
    for (double p : precisions) require(p > 0.5 && p <= 1.0, "precision settings must lie in (0.5, 1]");
    CalibrationOptions opt;
    if (a.precision_mode == "pooled")
        opt.precision_mode = PrecisionMode::Pooled;
    else
        require(a.precision_mode == "per-side", "--precision-mode must be per-side or pooled");
    if (a.objective == "positive-recall")
        opt.objective = CalibrationObjective::PositiveRecall;
    else
        require(a.objective == "coverage", "--objective must be coverage or positive-recall");

    const fs::path scores_path = a.scores;
    const auto matrix = read_score_matrix(scores_path);
    const fs::path labels_path = a.labels.empty() ? sibling(scores_path, "splits.json") : fs::path(a.labels);
    const auto labels = labels_for(matrix, read_split_labels(labels_path, "config"));
    std::vector<ModelSpec> models;
    for (const auto& id : matrix.model_ids()) models.push_back(ModelSpec{id, {}, {}, false});
    const auto entries = calibrate_all(models, matrix, labels, precisions, a.step, opt);
    write_calibrated(entries, a.out);
    out << nlohmann::json{{"entries", entries.size()}, {"models", models.size()}, {"out", a.out}}.dump() << '\n';
}

struct EvaluateArgs {
    std::string scores;
    std::string calibrated;
    std::string profile;
    std::string models;
    std::string labels;
    std::string scenario = "INFER_ONLY";
    int max_depth = 3;
    int anchor_depth = 3;
    bool allow_repeats = false;
    std::string pool = "full";
    std::string full_size = "224x224:FULL_RGB";
    std::string out;
};

inline void evaluate(const EvaluateArgs& a, std::ostream& out) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<Scenario> scenarios;
    if (a.scenario == "all" || a.scenario == "ALL")
        scenarios.assign(kAllScenarios.begin(), kAllScenarios.end());
    else
        scenarios.push_back(parse_scenario(a.scenario));
    const EnumerationOptions enumeration{a.max_depth, a.anchor_depth, a.allow_repeats};
    require(a.max_depth >= 1 && a.max_depth <= kMaxCascadeDepth, "--max-depth must be 1, 2 or 3");
    const auto keep = ablation_filter(pool_subset_name(a.pool), parse_representation_key(a.full_size));

    const fs::path scores_path = a.scores;
    const auto matrix = read_score_matrix(scores_path);
    const auto all_models = read_models(a.models.empty() ? sibling(scores_path, "models.json") : fs::path(a.models));
    const auto labels_path = a.labels.empty() ? sibling(scores_path, "splits.json") : fs::path(a.labels);
    const auto labels = labels_for(matrix, read_split_labels(labels_path, "eval"));
    const auto all_calibrated = read_calibrated(a.calibrated);
    const auto profile = read_profile(a.profile);

    std::vector<ModelSpec> models;
    std::set<std::string> kept;
    for (const auto& m : all_models)
        if (keep(m)) {
            models.push_back(m);
            kept.insert(m.model_id);
        }
    require(!models.empty(), "pool '" + a.pool + "' contains no models");
    std::vector<CalibratedModel> calibrated;
    for (const auto& c : all_calibrated)
        if (kept.count(c.model_id)) calibrated.push_back(c);

    const auto table = precompute_outcomes(matrix, models, calibrated);
    const CascadeSpace space(models, calibrated, enumeration);
    const CatalogEvaluator evaluator(table, labels, models, profile);

    auto file = open_out(a.out);
    file << kCatalogHeader << '\n';
    evaluate_catalog(space, evaluator, [&](const CatalogRecord& rec) {
        for (auto s : scenarios) write_catalog_row(file, space, rec, s);
    });
    file.flush();
    if (!file) fail_io("write to " + a.out + " failed");
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out << nlohmann::json{{"cascades", space.size()}, {"elapsed_s", elapsed}, {"out", a.out}}.dump() << '\n';
}

/// Per-scenario view of one or more catalogs, reduced while streaming.
struct CatalogDigest {
    std::array<std::optional<FrontierAccumulator>, kAllScenarios.size()> acc;
    std::array<std::uint64_t, kAllScenarios.size()> rows{};
    std::array<std::uint64_t, kAllScenarios.size()> single_models{};  // depth-1 rows, anchor excluded
    double min_accuracy = 1.0, max_accuracy = 0.0;

    bool has(Scenario s) const { return rows[static_cast<std::size_t>(s)] > 0; }
};

inline CatalogDigest digest_catalog(const fs::path& path, const std::string& anchor_id) {
    CatalogDigest d;
    std::uint64_t ordinal = 0;
    read_catalog(path, [&](const CatalogRow& r) {
        const auto s = static_cast<std::size_t>(r.scenario);
        if (!d.acc[s]) d.acc[s].emplace();
        d.acc[s]->add(r.point(ordinal++));
        ++d.rows[s];
        if (r.depth == 1 && r.terminal != anchor_id) ++d.single_models[s];
        d.min_accuracy = std::min(d.min_accuracy, r.accuracy);
        d.max_accuracy = std::max(d.max_accuracy, r.accuracy);
    });
    require(ordinal > 0, path.string() + ": catalog has no rows");
    return d;
}

inline Scenario only_scenario(const CatalogDigest& d, const std::string& what) {
    std::optional<Scenario> found;
    for (auto s : kAllScenarios)
        if (d.has(s)) {
            if (found) fail(what + " holds several scenarios; pass --scenario");
            found = s;
        }
    return *found;
}

struct FrontierArgs {
    std::string catalog;
    std::string scenario;
    std::string out;
};

inline void frontier(const FrontierArgs& a, std::ostream& out) {
    auto d = digest_catalog(a.catalog, "");
    const Scenario s = a.scenario.empty() ? only_scenario(d, a.catalog) : parse_scenario(a.scenario);
    require(d.has(s), a.catalog + " has no rows for scenario " + std::string(to_string(s)));
    const auto f = d.acc[static_cast<std::size_t>(s)]->finish();
    auto file = open_out(a.out);
    write_frontier(f, s, file);
    out << nlohmann::json{{"points", f.points.size()}, {"scenario", std::string(to_string(s))}, {"out", a.out}}.dump()
        << '\n';
}

struct SelectArgs {
    std::string frontier;
    std::optional<double> u_acc, u_thru, ref_accuracy;
};

inline void select_cmd(const SelectArgs& a, std::ostream& out) {
    const auto ff = read_frontier(a.frontier);
    EvalPoint p;
    if (a.ref_accuracy) {
        require(!a.u_acc && !a.u_thru, "--ref-accuracy cannot be combined with --u-acc or --u-thru");
        p = select_vs_reference(ff.frontier, *a.ref_accuracy);
    } else {
        require(a.u_acc || a.u_thru, "select needs --u-acc, --u-thru or --ref-accuracy");
        p = select(ff.frontier, SelectionConstraint{a.u_acc, a.u_thru});
    }
    out << nlohmann::json{{"cascade_id", p.cascade_id.str()},
                          {"accuracy", p.accuracy},
                          {"throughput_fps", p.throughput_fps},
                          {"depth", p.depth},
                          {"scenario", std::string(to_string(ff.scenario))}}
               .dump()
        << '\n';
}

struct ReportArgs {
    std::vector<std::string> catalogs;
    std::string experiment;
    std::string scenario = "CAMERA";
    std::string losses = "0,0.02,0.05,0.1";
    std::string anchor_id = "anchor";
    std::string out;
};

/// "label=path" or a bare path.
inline std::pair<std::string, std::string> split_label(const std::string& arg) {
    const auto eq = arg.find('=');
    if (eq == std::string::npos) return {"", arg};
    return {arg.substr(0, eq), arg.substr(eq + 1)};
}

inline std::vector<PoolResult> pools_from_catalogs(const ReportArgs& a, Scenario s,
                                                   const std::vector<std::string>& default_names) {
    std::vector<PoolResult> pools;
    for (std::size_t i = 0; i < a.catalogs.size(); ++i) {
        auto [label, path] = split_label(a.catalogs[i]);
        if (label.empty()) {
            require(a.catalogs.size() == default_names.size(),
                    "unlabelled catalogs must come in the order: " + [&] {
                        std::string names;
                        for (const auto& n : default_names) names += (names.empty() ? "" : ", ") + n;
                        return names;
                    }());
            label = default_names[i];
        }
        auto d = digest_catalog(path, a.anchor_id);
        const auto k = static_cast<std::size_t>(s);
        require(d.has(s), path + " has no rows for scenario " + std::string(to_string(s)));
        pools.push_back({label, d.single_models[k], d.rows[k], d.acc[k]->finish(), d.min_accuracy, d.max_accuracy});
    }
    return pools;
}

inline void report(const ReportArgs& a, std::ostream& out) {
    require(!a.catalogs.empty(), "report needs at least one --catalogs entry");
    const fs::path dir = a.out;
    ensure_dir(dir);
    nlohmann::json summary;
    if (a.experiment == "ablation") {
        const Scenario s = parse_scenario(a.scenario);
        const auto rep = ablation_report(s, pools_from_catalogs(a, s, ablation_subset_names()));
        auto csv = open_out(dir / "ablation.csv");
        write_ablation_csv(rep, csv);
        summary = summary_json(rep);
        write_json(summary, dir / "ablation_summary.json");
    } else if (a.experiment == "depth") {
        const Scenario s = parse_scenario(a.scenario);
        std::vector<std::string> names;
        for (const auto& c : default_depth_configs(a.catalogs.size() > 4)) names.push_back(c.name);
        const auto rep = depth_report(s, pools_from_catalogs(a, s, names));
        auto csv = open_out(dir / "depth.csv");
        write_depth_csv(rep, csv);
        summary = summary_json(rep);
        write_json(summary, dir / "depth_summary.json");
    } else if (a.experiment == "scenario") {
        const auto losses = parse_double_list(a.losses, "loss");
        // pass 1: frontiers per scenario across all catalogs
        std::array<FrontierAccumulator, kAllScenarios.size()> acc;
        std::array<bool, kAllScenarios.size()> seen{};
        for (const auto& c : a.catalogs)
            read_catalog(split_label(c).second, [&](const CatalogRow& r) {
                const auto k = static_cast<std::size_t>(r.scenario);
                acc[k].add(r.point());
                seen[k] = true;
            });
        std::array<ParetoFrontier, kAllScenarios.size()> frontiers;
        for (auto s : kAllScenarios) {
            const auto k = static_cast<std::size_t>(s);
            require(seen[k], "scenario report needs catalog rows for " + std::string(to_string(s)));
            frontiers[k] = acc[k].finish();
        }
        // pass 2: re-cost the inference-only choices under every scenario
        std::set<CascadeId> wanted;
        for (double loss : losses)
            wanted.insert(select(frontiers[static_cast<std::size_t>(Scenario::InferOnly)], {loss, std::nullopt}).cascade_id);
        std::map<std::pair<CascadeId, Scenario>, double> recost;
        for (const auto& c : a.catalogs)
            read_catalog(split_label(c).second, [&](const CatalogRow& r) {
                if (wanted.count(r.id)) recost[{r.id, r.scenario}] = r.throughput_fps;
            });
        const auto rows = scenario_rows(frontiers, losses, [&](const EvalPoint& p, Scenario s) {
            auto it = recost.find({p.cascade_id, s});
            if (it == recost.end())
                fail("cascade " + p.cascade_id.str() + " has no catalog row for " + std::string(to_string(s)));
            return it->second;
        });
        auto csv = open_out(dir / "scenario.csv");
        write_scenario_csv(rows, csv);
        summary = summary_json(rows);
        write_json(summary, dir / "scenario_summary.json");
    } else {
        fail("unknown experiment '" + a.experiment + "' (expected ablation, scenario or depth)");
    }
    out << summary.dump() << '\n';
}

}  // namespace cli_detail

/// Runs the command line; returns the process exit code. Diagnostics go to
/// `err`, machine-readable results to `out`.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    using namespace cli_detail;
    CLI::App app{"Cascade design-space optimizer for binary image predicates", "cascadeopt"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    GenCorpusArgs gen;
    auto* c_gen = app.add_subcommand("gen-corpus", "Generate a deterministic synthetic labeled corpus");
    c_gen->add_option("--seed", gen.seed, "Corpus seed")->capture_default_str();
    c_gen->add_option("--count", gen.count, "Number of images")->capture_default_str();
    c_gen->add_option("--size", gen.size, "Image size WxH")->capture_default_str();
    c_gen->add_option("--pos-frac", gen.pos_frac, "Fraction of positive images")->capture_default_str();
    c_gen->add_option("--out", gen.out, "Output directory")->required();

    ScoreArgs sc;
    auto* c_score = app.add_subcommand("score", "Score the configuration and evaluation splits with every grid model");
    c_score->add_option("--corpus", sc.corpus, "Corpus manifest or directory")->required();
    c_score->add_option("--splits", sc.splits, "train,config,eval fractions")->capture_default_str();
    c_score->add_option("--seed", sc.seed, "Scoring noise seed (overrides the grid config)");
    c_score->add_option("--split-seed", sc.split_seed, "Split seed (overrides the grid config)");
    c_score->add_option("--backend", sc.backend, "synthetic or file")->capture_default_str();
    c_score->add_option("--score-files", sc.score_files, "Score matrices served by the file backend");
    c_score->add_option("--grid", sc.grid, "Grid config JSON (defaults when omitted)");
    c_score->add_option("--profile", sc.profile, "Cost profile: synthetic or measured")->capture_default_str();
    c_score->add_option("--profile-reps", sc.profile_reps, "Repetitions for measured profiling")->capture_default_str();
    c_score->add_option("--profile-sample", sc.profile_sample, "Images timed by measured profiling")->capture_default_str();
    c_score->add_option("--out", sc.out, "Output directory")->required();

    CalibrateArgs cal;
    auto* c_cal = app.add_subcommand("calibrate", "Calibrate decision thresholds per model and precision setting");
    c_cal->add_option("--scores", cal.scores, "Configuration-split score matrix")->required();
    c_cal->add_option("--precisions", cal.precisions, "Comma-separated precision targets")->capture_default_str();
    c_cal->add_option("--step", cal.step, "Threshold grid step")->capture_default_str();
    c_cal->add_option("--labels", cal.labels, "Split label file (default: splits.json beside --scores)");
    c_cal->add_option("--precision-mode", cal.precision_mode, "per-side or pooled")->capture_default_str();
    c_cal->add_option("--objective", cal.objective, "coverage or positive-recall")->capture_default_str();
    c_cal->add_option("--out", cal.out, "Output JSON")->required();

    EvaluateArgs ev;
    auto* c_ev = app.add_subcommand("evaluate", "Evaluate every cascade and write the catalog");
    c_ev->add_option("--scores", ev.scores, "Evaluation-split score matrix")->required();
    c_ev->add_option("--calibrated", ev.calibrated, "Calibrated thresholds JSON")->required();
    c_ev->add_option("--profile", ev.profile, "Cost profile JSON")->required();
    c_ev->add_option("--models", ev.models, "Model registry (default: models.json beside --scores)");
    c_ev->add_option("--labels", ev.labels, "Split label file (default: splits.json beside --scores)");
    c_ev->add_option("--scenario", ev.scenario, "INFER_ONLY, ARCHIVE, ONGOING, CAMERA or ALL")->capture_default_str();
    c_ev->add_option("--max-depth", ev.max_depth, "Maximum cascade depth (1-3)")->capture_default_str();
    c_ev->add_option("--anchor-depth", ev.anchor_depth, "Cascades this deep or deeper end in the anchor")
        ->capture_default_str();
    c_ev->add_flag("--allow-repeats", ev.allow_repeats, "Allow a model at more than one position");
    c_ev->add_option("--pool", ev.pool, "Model pool: full, none, color or resize")->capture_default_str();
    c_ev->add_option("--full-size", ev.full_size, "Full-size representation for --pool")->capture_default_str();
    c_ev->add_option("--out", ev.out, "Catalog CSV")->required();

    FrontierArgs fr;
    auto* c_fr = app.add_subcommand("frontier", "Compute the Pareto frontier of a catalog");
    c_fr->add_option("--catalog", fr.catalog, "Catalog CSV")->required();
    c_fr->add_option("--scenario", fr.scenario, "Scenario (required if the catalog holds several)");
    c_fr->add_option("--out", fr.out, "Frontier CSV")->required();

    SelectArgs sel;
    auto* c_sel = app.add_subcommand("select", "Choose a frontier cascade under accuracy or throughput constraints");
    c_sel->add_option("--frontier", sel.frontier, "Frontier CSV")->required();
    c_sel->add_option("--u-acc", sel.u_acc, "Maximum relative accuracy loss");
    c_sel->add_option("--u-thru", sel.u_thru, "Maximum relative throughput loss");
    c_sel->add_option("--ref-accuracy", sel.ref_accuracy, "Least accurate cascade at or above this accuracy");

    ReportArgs rep;
    auto* c_rep = app.add_subcommand("report", "Build an experiment report from catalogs");
    c_rep->add_option("--catalogs", rep.catalogs, "Catalog CSVs, optionally as label=path")->required();
    c_rep->add_option("--experiment", rep.experiment, "ablation, scenario or depth")->required();
    c_rep->add_option("--scenario", rep.scenario, "Scenario for ablation and depth reports")->capture_default_str();
    c_rep->add_option("--losses", rep.losses, "Accuracy-loss levels for the scenario report")->capture_default_str();
    c_rep->add_option("--anchor-id", rep.anchor_id, "Anchor model id, excluded from model counts")
        ->capture_default_str();
    c_rep->add_option("--out", rep.out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (c_gen->parsed()) gen_corpus(gen, out);
        else if (c_score->parsed()) score(sc, out);
        else if (c_cal->parsed()) calibrate(cal, out);
        else if (c_ev->parsed()) evaluate(ev, out);
        else if (c_fr->parsed()) frontier(fr, out);
        else if (c_sel->parsed()) select_cmd(sel, out);
        else if (c_rep->parsed()) report(rep, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

}  // namespace cascadeopt
