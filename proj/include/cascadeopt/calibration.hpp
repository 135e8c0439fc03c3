#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cascadeopt/common.hpp"
#include "cascadeopt/models.hpp"
#include "cascadeopt/score_matrix.hpp"

namespace cascadeopt {

/// Scores <= p_low are confident negatives, scores >= p_high confident
/// positives (negative side checked first). The pair (0, 1) is reserved as
/// the never-confident sentinel and decides nothing.
struct ThresholdPair {
    double p_low = 0.0;
    double p_high = 1.0;
    double target_precision = 1.0;

    bool never_confident() const noexcept { return p_low == 0.0 && p_high == 1.0; }

    friend bool operator==(const ThresholdPair&, const ThresholdPair&) = default;
};

enum class Decision : std::uint8_t { DecidedPos, DecidedNeg, Uncertain };

inline Decision decide(double score, const ThresholdPair& t) noexcept {
    if (t.never_confident()) return Decision::Uncertain;
    if (score <= t.p_low) return Decision::DecidedNeg;
    if (score >= t.p_high) return Decision::DecidedPos;
    return Decision::Uncertain;
}

enum class PrecisionMode {
    PerSide,  // decided-positive and decided-negative precision each >= target
    Pooled,   // correct decisions / all decisions >= target
};

enum class CalibrationObjective {
    Coverage,        // fraction of images confidently decided
    PositiveRecall,  // true positives decided positive / all positives
};

struct CalibrationOptions {
    PrecisionMode precision_mode = PrecisionMode::PerSide;
    CalibrationObjective objective = CalibrationObjective::Coverage;
};

struct DecisionStats {
    std::size_t decided_pos = 0;
    std::size_t decided_neg = 0;
    std::size_t true_pos = 0;  // positives among decided-positive
    std::size_t true_neg = 0;  // negatives among decided-negative
    std::size_t total = 0;
    std::size_t positives = 0;

    double coverage() const { return total ? static_cast<double>(decided_pos + decided_neg) / static_cast<double>(total) : 0.0; }
    double pos_precision() const { return decided_pos ? static_cast<double>(true_pos) / static_cast<double>(decided_pos) : 1.0; }
    double neg_precision() const { return decided_neg ? static_cast<double>(true_neg) / static_cast<double>(decided_neg) : 1.0; }
    double pooled_precision() const {
        auto d = decided_pos + decided_neg;
        return d ? static_cast<double>(true_pos + true_neg) / static_cast<double>(d) : 1.0;
    }
};

inline DecisionStats decision_stats(std::span<const double> scores, std::span<const Label> labels, const ThresholdPair& t) {
    require(scores.size() == labels.size(), "scores and labels differ in length");
    DecisionStats s;
    s.total = scores.size();
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool pos = is_positive(labels[i]);
        s.positives += pos;
        switch (decide(scores[i], t)) {
            case Decision::DecidedPos: ++s.decided_pos; s.true_pos += pos; break;
            case Decision::DecidedNeg: ++s.decided_neg; s.true_neg += !pos; break;
            case Decision::Uncertain: break;
        }
    }
    return s;
}

/// Grid {0, step, 2*step, ..., 1}. When step divides 1 the values are i/n
/// so that e.g. 0.1 is the nearest double to one tenth; otherwise 1 is appended.
inline std::vector<double> threshold_grid(double step) {
    require(std::isfinite(step) && step > 0.0 && step <= 0.5, "grid step must lie in (0, 0.5]");
    std::vector<double> grid;
    const double inv = 1.0 / step;
    const double n_round = std::round(inv);
    if (std::abs(inv - n_round) < 1e-9) {
        const auto n = static_cast<int>(n_round);
        for (int i = 0; i <= n; ++i) grid.push_back(static_cast<double>(i) / n);
    } else {
        for (int i = 0; static_cast<double>(i) * step < 1.0; ++i) grid.push_back(static_cast<double>(i) * step);
        grid.push_back(1.0);
    }
    return grid;
}

namespace detail {

inline bool feasible(const DecisionStats& s, double target, PrecisionMode mode) {
    if (mode == PrecisionMode::Pooled) return s.pooled_precision() >= target;
    return s.pos_precision() >= target && s.neg_precision() >= target;
}

/// True if candidate `a` beats incumbent `b` (both feasible).
inline bool better(const DecisionStats& a, double a_low, double a_high, const DecisionStats& b, double b_low,
                   double b_high, CalibrationObjective objective) {
    const auto primary = [objective](const DecisionStats& s) {
        return objective == CalibrationObjective::Coverage ? s.decided_pos + s.decided_neg : s.true_pos;
    };
    if (primary(a) != primary(b)) return primary(a) > primary(b);
    if (a.decided_pos != b.decided_pos) return a.decided_pos > b.decided_pos;
    // widest uncertain band among pairs deciding the same images
    if (a_high != b_high) return a_high > b_high;
    return a_low < b_low;
}

}  // namespace detail

/// Grid search for the pair maximizing the objective subject to the precision
/// target. Ties: more positive-side decisions, then larger p_high, then
/// smaller p_low. Returns the sentinel (0, 1) if no pair deciding at least one
/// image is feasible.
inline ThresholdPair calibrate_thresholds(std::span<const double> scores, std::span<const Label> labels,
                                          double target_precision, double grid_step,
                                          const CalibrationOptions& options = {}) {
    require(!scores.empty(), "calibration: empty score list");
    require(scores.size() == labels.size(), "calibration: scores and labels differ in length");
    require(target_precision > 0.5 && target_precision <= 1.0, "calibration: target precision must lie in (0.5, 1]");
    for (double s : scores) require(std::isfinite(s) && s >= 0.0 && s <= 1.0, "calibration: score outside [0,1]");
    const auto grid = threshold_grid(grid_step);
    const std::size_t G = grid.size();

    // Cumulative class counts at every grid value, from scores sorted once.
    std::vector<std::pair<double, bool>> sorted(scores.size());
    std::size_t positives = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        sorted[i] = {scores[i], is_positive(labels[i])};
        positives += sorted[i].second;
    }
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::size_t> prefix_pos(sorted.size() + 1, 0);
    for (std::size_t i = 0; i < sorted.size(); ++i) prefix_pos[i + 1] = prefix_pos[i] + sorted[i].second;
    auto count_le = [&](double g) {
        return static_cast<std::size_t>(
            std::upper_bound(sorted.begin(), sorted.end(), g, [](double v, const auto& e) { return v < e.first; }) -
            sorted.begin());
    };
    auto count_lt = [&](double g) {
        return static_cast<std::size_t>(
            std::lower_bound(sorted.begin(), sorted.end(), g, [](const auto& e, double v) { return e.first < v; }) -
            sorted.begin());
    };
    std::vector<std::size_t> le_all(G), le_pos(G), lt_all(G), lt_pos(G);
    for (std::size_t i = 0; i < G; ++i) {
        le_all[i] = count_le(grid[i]);
        le_pos[i] = prefix_pos[le_all[i]];
        lt_all[i] = count_lt(grid[i]);
        lt_pos[i] = prefix_pos[lt_all[i]];
    }
    const std::size_t n = sorted.size();

    bool found = false;
    DecisionStats best;
    double best_low = 0.0, best_high = 1.0;
    for (std::size_t lo = 0; lo < G; ++lo) {
        for (std::size_t hi = lo; hi < G; ++hi) {
            if (grid[lo] == 0.0 && grid[hi] == 1.0) continue;  // reserved sentinel
            DecisionStats s;
            s.total = n;
            s.positives = positives;
            s.decided_neg = le_all[lo];
            s.true_neg = le_all[lo] - le_pos[lo];
            // positive side: score >= p_high and not already decided negative
            const std::size_t ge_start = hi == lo ? le_all[lo] : lt_all[hi];
            const std::size_t ge_pos_start = hi == lo ? le_pos[lo] : lt_pos[hi];
            s.decided_pos = n - ge_start;
            s.true_pos = positives - ge_pos_start;
            if (s.decided_pos + s.decided_neg == 0) continue;
            if (!detail::feasible(s, target_precision, options.precision_mode)) continue;
            if (!found || detail::better(s, grid[lo], grid[hi], best, best_low, best_high, options.objective)) {
                found = true;
                best = s;
                best_low = grid[lo];
                best_high = grid[hi];
            }
        }
    }
    if (!found) return {0.0, 1.0, target_precision};
    return {best_low, best_high, target_precision};
}

struct CalibratedModel {
    std::string model_id;
    ThresholdPair threshold;
    double coverage = 0.0;
    double pos_precision = 1.0;
    double neg_precision = 1.0;

    friend bool operator==(const CalibratedModel&, const CalibratedModel&) = default;
};

/// One entry per (model, precision setting), model-major, in the given orders.
inline std::vector<CalibratedModel> calibrate_all(const std::vector<ModelSpec>& models, const ScoreMatrix& config_matrix,
                                                  std::span<const Label> labels,
                                                  const std::vector<double>& precision_settings, double grid_step,
                                                  const CalibrationOptions& options = {}) {
    require(!precision_settings.empty(), "calibrate_all: no precision settings");
    require(labels.size() == config_matrix.image_count(), "calibrate_all: label count does not match matrix columns");
    std::vector<CalibratedModel> out(models.size() * precision_settings.size());
    parallel_for(models.size(), [&](std::size_t i) {
        const auto& m = models[i];
        std::span<const double> row(config_matrix.row(config_matrix.model_row(m.model_id)), config_matrix.image_count());
        for (std::size_t k = 0; k < precision_settings.size(); ++k) {
            ThresholdPair t;
            try {
                t = calibrate_thresholds(row, labels, precision_settings[k], grid_step, options);
            } catch (const Error& e) {
                throw Error(e.kind(), "model '" + m.model_id + "': " + e.what());
            }
            const auto stats = decision_stats(row, labels, t);
            out[i * precision_settings.size() + k] =
                CalibratedModel{m.model_id, t, stats.coverage(), stats.pos_precision(), stats.neg_precision()};
        }
    });
    return out;
}

inline nlohmann::json to_json(const CalibratedModel& c) {
    return {{"model_id", c.model_id},       {"target_precision", c.threshold.target_precision},
            {"p_low", c.threshold.p_low},   {"p_high", c.threshold.p_high},
            {"coverage", c.coverage},       {"pos_precision", c.pos_precision},
            {"neg_precision", c.neg_precision}};
}

inline CalibratedModel calibrated_from_json(const nlohmann::json& j) {
    try {
        CalibratedModel c;
        c.model_id = j.at("model_id").get<std::string>();
        c.threshold = {j.at("p_low").get<double>(), j.at("p_high").get<double>(), j.at("target_precision").get<double>()};
        c.coverage = j.at("coverage").get<double>();
        c.pos_precision = j.at("pos_precision").get<double>();
        c.neg_precision = j.at("neg_precision").get<double>();
        require(c.threshold.p_low <= c.threshold.p_high, "model '" + c.model_id + "': p_low exceeds p_high");
        return c;
    } catch (const nlohmann::json::exception& e) {
        fail(std::string("malformed calibrated-model entry: ") + e.what());
    }
}

inline void write_calibrated(const std::vector<CalibratedModel>& entries, const std::filesystem::path& path) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : entries) arr.push_back(to_json(c));
    std::ofstream out(path);
    if (!out) fail_io("cannot write " + path.string());
    out << arr.dump(1) << '\n';
}

inline std::vector<CalibratedModel> read_calibrated(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail_io("cannot open " + path.string());
    nlohmann::json arr;
    try {
        in >> arr;
    } catch (const nlohmann::json::exception& e) {
        fail(path.string() + " is not valid JSON: " + e.what());
    }
    require(arr.is_array(), path.string() + " must be a JSON array");
    std::vector<CalibratedModel> out;
    for (const auto& j : arr) out.push_back(calibrated_from_json(j));
    return out;
}

}  // namespace cascadeopt
