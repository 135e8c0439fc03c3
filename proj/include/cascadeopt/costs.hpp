#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cascadeopt/cascade.hpp"
#include "cascadeopt/common.hpp"
#include "cascadeopt/corpus.hpp"
#include "cascadeopt/models.hpp"
#include "cascadeopt/pnm.hpp"
#include "cascadeopt/transforms.hpp"

namespace cascadeopt {

/// Which data-handling costs a deployment pays on top of inference.
enum class Scenario : std::uint8_t {
    InferOnly,  // inference only
    Archive,    // load the full-size image, transform it, infer
    Ongoing,    // load a pre-stored representation, infer
    Camera,     // transform an in-memory frame, infer
};

inline constexpr std::array<Scenario, 4> kAllScenarios = {Scenario::InferOnly, Scenario::Archive, Scenario::Ongoing,
                                                          Scenario::Camera};

inline std::string_view to_string(Scenario s) {
    switch (s) {
        case Scenario::InferOnly: return "INFER_ONLY";
        case Scenario::Archive: return "ARCHIVE";
        case Scenario::Ongoing: return "ONGOING";
        case Scenario::Camera: return "CAMERA";
    }
    return "?";
}

/// Accepts the canonical names case-insensitively, with '-' for '_'.
inline Scenario parse_scenario(std::string_view s) {
    std::string norm;
    for (char c : s) norm.push_back(c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    for (auto sc : kAllScenarios)
        if (to_string(sc) == norm) return sc;
    fail("unknown scenario '" + std::string(s) + "' (expected infer_only, archive, ongoing or camera)");
}

struct CostProfile {
    double load_full_s = 0.0;
    std::map<std::string, double> load_repr_s;  // keyed by RepresentationKey
    std::map<std::string, double> transform_s;  // keyed by RepresentationKey
    std::map<std::string, double> infer_s;      // keyed by model id

    friend bool operator==(const CostProfile&, const CostProfile&) = default;
};

struct TimeBreakdown {
    double load_s = 0.0;
    double transform_s = 0.0;
    double infer_s = 0.0;
    double total_s = 0.0;
};

namespace detail {
inline double lookup_cost(const std::map<std::string, double>& table, const std::string& key, const char* what) {
    auto it = table.find(key);
    if (it == table.end()) fail(std::string("cost profile has no ") + what + " entry for '" + key + "'");
    return it->second;
}
}  // namespace detail

inline void validate_profile(const CostProfile& p) {
    require(p.load_full_s >= 0.0, "cost profile: negative load_full_s");
    for (const auto* table : {&p.load_repr_s, &p.transform_s, &p.infer_s})
        for (const auto& [k, v] : *table) require(v >= 0.0 && std::isfinite(v), "cost profile: invalid time for '" + k + "'");
}

struct SyntheticCostConstants {
    double c0 = 5e-5;   // fixed per-inference overhead, s
    double c1 = 2e-9;   // s per input value, scaled by relative capacity
    double c2 = 5e-10;  // transform, s per output value
    double c3 = 1e-9;   // load, s per value read
};

inline constexpr double kAnchorInferMultiple = 50.0;

/// Deterministic stand-in for profiling. Inference grows with input size and
/// capacity, transforms and loads with value counts; the anchor costs 50x the
/// most expensive grid model.
inline CostProfile profile_costs_synthetic(const std::vector<ModelSpec>& models, const SyntheticCostConstants& c = {},
                                           const TransformSpec& full_size = {224, 224, ColorMode::FullRgb}) {
    validate_models(models);
    CostProfile p;
    p.load_full_s = c.c3 * static_cast<double>(input_value_count(full_size));
    double max_grid = -1.0;
    auto grid_infer = [&](const ModelSpec& m) {
        const double arch_mult =
            static_cast<double>(m.arch.conv_layers) * m.arch.conv_nodes * m.arch.dense_nodes / kMaxGridCapacity;
        return c.c0 + c.c1 * static_cast<double>(input_value_count(m.transform)) * arch_mult;
    };
    for (const auto& m : models) {
        const auto key = representation_key(m.transform).value;
        const double values = static_cast<double>(input_value_count(m.transform));
        p.transform_s[key] = c.c2 * values;
        p.load_repr_s[key] = c.c3 * values;
        if (!m.is_anchor) {
            p.infer_s[m.model_id] = grid_infer(m);
            max_grid = std::max(max_grid, p.infer_s[m.model_id]);
        }
    }
    for (const auto& m : models)
        if (m.is_anchor) p.infer_s[m.model_id] = kAnchorInferMultiple * (max_grid >= 0 ? max_grid : grid_infer(m));
    return p;
}

namespace detail {
template <typename Fn>
double median_seconds(int repetitions, Fn&& fn) {
    std::vector<double> samples;
    for (int r = 0; r < repetitions; ++r) {
        auto t0 = std::chrono::steady_clock::now();
        fn();
        auto t1 = std::chrono::steady_clock::now();
        samples.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    std::nth_element(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(samples.size() / 2), samples.end());
    // one clock tick is the smallest time we can claim
    return std::max(samples[samples.size() / 2], 1e-9);
}
}  // namespace detail

/// Wall-clock profile on this machine: per-image medians over `repetitions`
/// passes over `sample`. Loads are timed by reading files written to
/// `scratch_dir`. Single-threaded for timing integrity.
inline CostProfile profile_costs_measured(const ScorerBackend& backend, const std::vector<ModelSpec>& models,
                                          const LabeledDataset& sample, int repetitions,
                                          const std::filesystem::path& scratch_dir) {
    require(repetitions >= 3, "measured profiling needs at least 3 repetitions");
    validate_models(models);
    validate_dataset(sample);
    std::error_code ec;
    std::filesystem::create_directories(scratch_dir, ec);
    if (ec) fail_io("cannot create " + scratch_dir.string() + ": " + ec.message());
    const double n = static_cast<double>(sample.size());

    CostProfile p;
    std::vector<std::filesystem::path> full_files;
    for (const auto& img : sample.images) {
        full_files.push_back(scratch_dir / ("full_" + std::to_string(img.id) + (img.channels == 1 ? ".pgm" : ".ppm")));
        pnm::write(full_files.back(), img.width, img.height, img.channels, img.pixels);
    }
    std::uint64_t sink = 0;
    p.load_full_s = detail::median_seconds(repetitions, [&] {
        for (const auto& f : full_files) sink += pnm::read(f).pixels.size();
    }) / n;

    std::map<std::string, std::vector<ImageRecord>> transformed;
    for (const auto& m : models) {
        const auto key = representation_key(m.transform).value;
        if (transformed.count(key)) continue;
        std::vector<ImageRecord> outs;
        p.transform_s[key] = detail::median_seconds(repetitions, [&] {
            outs.clear();
            for (const auto& img : sample.images) outs.push_back(apply_transform(img, m.transform));
        }) / n;
        std::vector<std::filesystem::path> files;
        std::string stem = key;
        std::replace(stem.begin(), stem.end(), ':', '_');
        for (const auto& img : outs) {
            files.push_back(scratch_dir / (stem + "_" + std::to_string(img.id) + (img.channels == 1 ? ".pgm" : ".ppm")));
            pnm::write(files.back(), img.width, img.height, img.channels, img.pixels);
        }
        p.load_repr_s[key] = detail::median_seconds(repetitions, [&] {
            for (const auto& f : files) sink += pnm::read(f).pixels.size();
        }) / n;
        transformed.emplace(key, std::move(outs));
    }
    for (const auto& m : models) {
        const auto& inputs = transformed.at(representation_key(m.transform).value);
        double acc = 0;
        p.infer_s[m.model_id] = detail::median_seconds(repetitions, [&] {
            for (const auto& img : inputs) acc += backend.score(m, img);
        }) / n;
        sink += static_cast<std::uint64_t>(acc);
    }
    (void)sink;
    return p;
}

struct ClassifyTime {
    double expected_time_s = 0.0;
    TimeBreakdown breakdown;
};

/// Per-image cost of one executed level under a scenario, given whether its
/// representation was already produced earlier in the same walk.
inline TimeBreakdown level_charge(Scenario scenario, const CostProfile& profile, const std::string& model_id,
                                  const std::string& key, bool first_use_of_key, bool first_level) {
    TimeBreakdown t;
    t.infer_s = detail::lookup_cost(profile.infer_s, model_id, "infer_s");
    switch (scenario) {
        case Scenario::InferOnly: break;
        case Scenario::Archive:
            if (first_level) t.load_s += profile.load_full_s;
            if (first_use_of_key) t.transform_s += detail::lookup_cost(profile.transform_s, key, "transform_s");
            break;
        case Scenario::Ongoing:
            if (first_use_of_key) t.load_s += detail::lookup_cost(profile.load_repr_s, key, "load_repr_s");
            break;
        case Scenario::Camera:
            if (first_use_of_key) t.transform_s += detail::lookup_cost(profile.transform_s, key, "transform_s");
            break;
    }
    t.total_s = t.load_s + t.transform_s + t.infer_s;
    return t;
}

/// Expected per-image time of a cascade, charging data handling lazily at the
/// first executed level that needs each representation.
inline ClassifyTime expected_classify_time(const CascadeSpec& cascade, const OutcomeTable& table,
                                           const std::vector<ModelSpec>& models, const CostProfile& profile,
                                           Scenario scenario) {
    check_cascade(cascade, table);
    require(models.size() == table.model_count(), "model list does not match outcome table");
    std::vector<std::size_t> level_models;
    for (auto e : cascade.level_entries()) level_models.push_back(table.entry_model(e));
    level_models.push_back(cascade.terminal);
    std::vector<std::string> keys;
    for (auto m : level_models) keys.push_back(representation_key(models[m].transform).value);

    TimeBreakdown sum;
    std::vector<std::size_t> seen;
    for (std::size_t i = 0; i < table.image_count(); ++i) {
        seen.clear();
        for (std::size_t l = 0; l < level_models.size(); ++l) {
            const bool is_terminal = l + 1 == level_models.size();
            const auto dup = std::find_if(seen.begin(), seen.end(), [&](std::size_t s) { return keys[s] == keys[l]; });
            const bool first_use = dup == seen.end();
            if (first_use) seen.push_back(l);
            const auto c = level_charge(scenario, profile, models[level_models[l]].model_id, keys[l], first_use, l == 0);
            sum.load_s += c.load_s;
            sum.transform_s += c.transform_s;
            sum.infer_s += c.infer_s;
            if (is_terminal || table.outcome(cascade.level_entries()[l], i) != Decision::Uncertain) break;
        }
    }
    const double n = static_cast<double>(table.image_count());
    ClassifyTime out;
    out.breakdown.load_s = sum.load_s / n;
    out.breakdown.transform_s = sum.transform_s / n;
    out.breakdown.infer_s = sum.infer_s / n;
    out.breakdown.total_s = out.breakdown.load_s + out.breakdown.transform_s + out.breakdown.infer_s;
    out.expected_time_s = out.breakdown.total_s;
    return out;
}

// ---------------------------------------------------------------------------
// CostProfile JSON
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const CostProfile& p) {
    return {{"load_full_s", p.load_full_s},
            {"load_repr_s", p.load_repr_s},
            {"transform_s", p.transform_s},
            {"infer_s", p.infer_s}};
}

inline CostProfile profile_from_json(const nlohmann::json& j) {
    try {
        CostProfile p;
        p.load_full_s = j.at("load_full_s").get<double>();
        p.load_repr_s = j.at("load_repr_s").get<std::map<std::string, double>>();
        p.transform_s = j.at("transform_s").get<std::map<std::string, double>>();
        p.infer_s = j.at("infer_s").get<std::map<std::string, double>>();
        validate_profile(p);
        return p;
    } catch (const nlohmann::json::exception& e) {
        fail(std::string("malformed cost profile: ") + e.what());
    }
}

inline void write_profile(const CostProfile& p, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) fail_io("cannot write " + path.string());
    out << to_json(p).dump(1) << '\n';
}

inline CostProfile read_profile(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail_io("cannot open cost profile " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(path.string() + " is not valid JSON: " + e.what());
    }
    return profile_from_json(j);
}

}  // namespace cascadeopt
