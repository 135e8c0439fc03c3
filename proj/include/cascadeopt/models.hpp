#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "cascadeopt/common.hpp"
#include "cascadeopt/corpus.hpp"
#include "cascadeopt/parallel.hpp"
#include "cascadeopt/score_matrix.hpp"
#include "cascadeopt/transforms.hpp"

namespace cascadeopt {

struct ArchSpec {
    int conv_layers = 1;
    int conv_nodes = 16;
    int dense_nodes = 16;

    friend bool operator==(const ArchSpec&, const ArchSpec&) = default;
};

/// A basic classifier: an architecture applied to one input representation.
struct ModelSpec {
    std::string model_id;
    ArchSpec arch;
    TransformSpec transform;
    /// The expensive, accurate reference model allowed as a deep-cascade terminal.
    bool is_anchor = false;

    friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

struct ArchOptions {
    std::vector<int> conv_layers{1, 2, 4};
    std::vector<int> conv_nodes{16, 32};
    std::vector<int> dense_nodes{16, 32, 64};

    std::size_t combinations() const { return conv_layers.size() * conv_nodes.size() * dense_nodes.size(); }
};

inline std::string grid_model_id(const ArchSpec& a, const TransformSpec& t) {
    return "l" + std::to_string(a.conv_layers) + "-c" + std::to_string(a.conv_nodes) + "-d" +
           std::to_string(a.dense_nodes) + "_" + std::to_string(t.out_width) + "x" + std::to_string(t.out_height) +
           "_" + std::string(to_string(t.color_mode));
}

/// Cross product of architecture options and transforms, arch-major.
inline std::vector<ModelSpec> enumerate_model_grid(const ArchOptions& arch, const std::vector<TransformSpec>& transforms) {
    auto check_dim = [](const std::vector<int>& v, const char* name) {
        require(!v.empty(), std::string("model grid: no options for ") + name);
        for (std::size_t i = 0; i < v.size(); ++i) {
            require(v[i] >= 1, std::string("model grid: ") + name + " options must be >= 1");
            for (std::size_t j = 0; j < i; ++j)
                require(v[i] != v[j], std::string("model grid: duplicate ") + name + " option " + std::to_string(v[i]));
        }
    };
    check_dim(arch.conv_layers, "conv_layers");
    check_dim(arch.conv_nodes, "conv_nodes");
    check_dim(arch.dense_nodes, "dense_nodes");
    require(!transforms.empty(), "model grid: no transform options");
    for (std::size_t i = 0; i < transforms.size(); ++i) {
        validate(transforms[i]);
        for (std::size_t j = 0; j < i; ++j)
            require(!(transforms[i] == transforms[j]),
                    "model grid: duplicate transform " + representation_key(transforms[i]).value);
    }

    std::vector<ModelSpec> out;
    out.reserve(arch.combinations() * transforms.size());
    for (int layers : arch.conv_layers)
        for (int nodes : arch.conv_nodes)
            for (int dense : arch.dense_nodes)
                for (const auto& t : transforms) {
                    ArchSpec a{layers, nodes, dense};
                    out.push_back({grid_model_id(a, t), a, t, false});
                }
    return out;
}

inline ModelSpec make_anchor_model(std::string model_id = "anchor",
                                   TransformSpec transform = {224, 224, ColorMode::FullRgb}) {
    // nominal architecture; the anchor's behaviour and cost do not derive from it
    return {std::move(model_id), ArchSpec{50, 64, 64}, transform, true};
}

inline void validate_models(const std::vector<ModelSpec>& models) {
    require(!models.empty(), "model list is empty");
    std::unordered_map<std::string, std::size_t> seen;
    for (const auto& m : models) {
        require(!m.model_id.empty(), "model with empty id");
        require(m.model_id.find(',') == std::string::npos && m.model_id.find(';') == std::string::npos &&
                    m.model_id.find('@') == std::string::npos,
                "model id '" + m.model_id + "' contains a reserved character (, ; @)");
        require(seen.emplace(m.model_id, 0).second, "duplicate model id '" + m.model_id + "'");
        validate(m.transform);
        require(m.arch.conv_layers >= 1 && m.arch.conv_nodes >= 1 && m.arch.dense_nodes >= 1,
                "model '" + m.model_id + "': architecture values must be >= 1");
    }
}

// ---------------------------------------------------------------------------
// Model registry JSON
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const ModelSpec& m) {
    return {{"model_id", m.model_id},
            {"arch", {{"conv_layers", m.arch.conv_layers}, {"conv_nodes", m.arch.conv_nodes}, {"dense_nodes", m.arch.dense_nodes}}},
            {"transform",
             {{"width", m.transform.out_width}, {"height", m.transform.out_height},
              {"color_mode", std::string(to_string(m.transform.color_mode))}}},
            {"is_anchor", m.is_anchor}};
}

inline ModelSpec model_from_json(const nlohmann::json& j) {
    try {
        ModelSpec m;
        m.model_id = j.at("model_id").get<std::string>();
        const auto& a = j.at("arch");
        m.arch = {a.at("conv_layers").get<int>(), a.at("conv_nodes").get<int>(), a.at("dense_nodes").get<int>()};
        const auto& t = j.at("transform");
        m.transform = {t.at("width").get<int>(), t.at("height").get<int>(),
                       parse_color_mode(t.at("color_mode").get<std::string>())};
        m.is_anchor = j.value("is_anchor", false);
        return m;
    } catch (const nlohmann::json::exception& e) {
        fail(std::string("malformed model entry: ") + e.what());
    }
}

inline void write_models(const std::vector<ModelSpec>& models, const std::filesystem::path& path) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& m : models) arr.push_back(to_json(m));
    std::ofstream out(path);
    if (!out) fail_io("cannot write model registry " + path.string());
    out << arr.dump(1) << '\n';
}

inline std::vector<ModelSpec> read_models(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail_io("cannot open model registry " + path.string());
    nlohmann::json arr;
    try {
        in >> arr;
    } catch (const nlohmann::json::exception& e) {
        fail("model registry " + path.string() + " is not valid JSON: " + e.what());
    }
    require(arr.is_array(), "model registry " + path.string() + " must be a JSON array");
    std::vector<ModelSpec> out;
    for (const auto& j : arr) out.push_back(model_from_json(j));
    validate_models(out);
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic scoring
// ---------------------------------------------------------------------------

inline constexpr double kSyntheticGain = 4.0;
inline constexpr double kSyntheticNoise = 0.75;
inline constexpr double kFullInputValues = 150528.0;  // 224 x 224 x 3
inline constexpr double kMaxGridCapacity = 4.0 * 32.0 * 64.0;

/// Quality in the synthetic score model: grows with input size and capacity; anchors have 1.
inline double synthetic_quality(const ModelSpec& model) {
    if (model.is_anchor) return 1.0;
    const double inputs = static_cast<double>(input_value_count(model.transform));
    const double units = static_cast<double>(model.arch.conv_layers) * model.arch.conv_nodes * model.arch.dense_nodes;
    const double capacity = std::clamp(std::log2(units) / std::log2(kMaxGridCapacity), 0.0, 1.0);
    return 0.35 + 0.4 * (std::log2(inputs) / std::log2(kFullInputValues)) + 0.25 * capacity;
}

/// Per-(model, image) noise, uniform in [-0.75, 0.75].
inline double synthetic_noise(std::uint64_t noise_seed, const std::string& model_id, std::uint64_t image_id) {
    const double u = unit_interval(hash_values(noise_seed, fnv1a64(model_id), image_id));
    return -kSyntheticNoise + 2.0 * kSyntheticNoise * u;
}

/// sigmoid(k * q * s * (1 - d) + eps) with s = +1 for positives, -1 otherwise.
inline double synthetic_score(const ModelSpec& model, const ImageRecord& image, std::uint64_t noise_seed) {
    if (!image.latent_difficulty)
        fail("synthetic scoring needs latent_difficulty; image " + std::to_string(image.id) + " has none");
    const double s = is_positive(image.label) ? 1.0 : -1.0;
    const double d = *image.latent_difficulty;
    const double z = kSyntheticGain * synthetic_quality(model) * s * (1.0 - d) +
                     synthetic_noise(noise_seed, model.model_id, image.id);
    return 1.0 / (1.0 + std::exp(-z));
}

/// Source of per-(model, image) probabilistic outputs. Implementations must be
/// deterministic and return values in [0,1].
class ScorerBackend {
public:
    virtual ~ScorerBackend() = default;
    virtual double score(const ModelSpec& model, const ImageRecord& image) const = 0;
    /// False if score() must not be called concurrently.
    virtual bool concurrent() const { return true; }
};

class SyntheticScorer final : public ScorerBackend {
public:
    explicit SyntheticScorer(std::uint64_t noise_seed) : seed_(noise_seed) {}
    double score(const ModelSpec& model, const ImageRecord& image) const override {
        return synthetic_score(model, image, seed_);
    }

private:
    std::uint64_t seed_;
};

/// Serves scores from previously written matrices, e.g. those produced by an
/// external training adapter.
class FileScorer final : public ScorerBackend {
public:
    explicit FileScorer(std::vector<ScoreMatrix> sources) : sources_(std::move(sources)) {
        require(!sources_.empty(), "file scorer needs at least one score matrix");
    }

    double score(const ModelSpec& model, const ImageRecord& image) const override {
        for (const auto& m : sources_)
            if (m.has_model(model.model_id) && m.has_image(image.id))
                return m.at(m.model_row(model.model_id), m.image_col(image.id));
        fail("no stored score for model '" + model.model_id + "' on image " + std::to_string(image.id));
    }

private:
    std::vector<ScoreMatrix> sources_;
};

/// Decorator counting score() invocations.
class CountingScorer final : public ScorerBackend {
public:
    explicit CountingScorer(const ScorerBackend& inner) : inner_(inner) {}
    double score(const ModelSpec& model, const ImageRecord& image) const override {
        calls_.fetch_add(1, std::memory_order_relaxed);
        return inner_.score(model, image);
    }
    bool concurrent() const override { return inner_.concurrent(); }
    std::uint64_t calls() const { return calls_.load(); }

private:
    const ScorerBackend& inner_;
    mutable std::atomic<std::uint64_t> calls_{0};
};

/// Scores every (model, image) pair exactly once. Rows follow `models`,
/// columns follow `dataset.images`.
inline ScoreMatrix score_dataset(const ScorerBackend& backend, const std::vector<ModelSpec>& models,
                                 const LabeledDataset& dataset) {
    require(!models.empty(), "score_dataset: no models");
    require(!dataset.images.empty(), "score_dataset: empty dataset");
    std::vector<std::string> ids;
    for (const auto& m : models) ids.push_back(m.model_id);
    std::vector<std::uint64_t> image_ids;
    for (const auto& img : dataset.images) image_ids.push_back(img.id);
    ScoreMatrix out(dataset.name, std::move(ids), std::move(image_ids));

    auto score_row = [&](std::size_t i) {
        for (std::size_t j = 0; j < dataset.images.size(); ++j) {
            double v = 0;
            try {
                v = backend.score(models[i], dataset.images[j]);
            } catch (const std::exception& e) {
                fail("scoring model '" + models[i].model_id + "' on image " + std::to_string(dataset.images[j].id) +
                     " failed: " + e.what());
            }
            if (!(std::isfinite(v) && v >= 0.0 && v <= 1.0))
                fail("backend returned out-of-range score for model '" + models[i].model_id + "' on image " +
                     std::to_string(dataset.images[j].id));
            out.set(i, j, v);
        }
    };
    parallel_for(models.size(), score_row, backend.concurrent() ? worker_count() : 1u);
    return out;
}

/// Labels aligned with the matrix's image columns.
inline std::vector<Label> labels_for(const ScoreMatrix& matrix, const std::unordered_map<std::uint64_t, Label>& by_id) {
    std::vector<Label> out;
    out.reserve(matrix.image_count());
    for (auto id : matrix.image_ids()) {
        auto it = by_id.find(id);
        if (it == by_id.end()) fail("no label for image " + std::to_string(id));
        out.push_back(it->second);
    }
    return out;
}

inline std::vector<Label> labels_for(const ScoreMatrix& matrix, const LabeledDataset& dataset) {
    std::unordered_map<std::uint64_t, Label> by_id;
    for (const auto& img : dataset.images) by_id.emplace(img.id, img.label);
    return labels_for(matrix, by_id);
}

}  // namespace cascadeopt
