#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cascadeopt/common.hpp"
#include "cascadeopt/costs.hpp"
#include "cascadeopt/models.hpp"
#include "cascadeopt/transforms.hpp"

namespace cascadeopt {

/// Everything that defines an experiment grid. Loaded from a single JSON file;
/// every key is optional and falls back to the defaults below.
///
///   {
///     "arch": {"conv_layers": [1,2,4], "conv_nodes": [16,32], "dense_nodes": [16,32,64]},
///     "transforms": {"sizes": [30,60,120,224], "color_modes": ["FULL_RGB","RED","GREEN","BLUE","GRAY"]},
///     "transform_list": ["30x30:RED", ...],          // overrides "transforms" when present
///     "anchor": {"enabled": true, "model_id": "anchor", "representation": "224x224:FULL_RGB"},
///     "precision_settings": [0.91,0.93,0.95,0.97,0.99],
///     "grid_step": 0.01,
///     "cost_constants": {"c0": 5e-5, "c1": 2e-9, "c2": 5e-10, "c3": 1e-9},
///     "full_size": "224x224:FULL_RGB",
///     "seeds": {"noise": 42, "split": 7}
///   }
struct GridConfig {
    ArchOptions arch;
    std::vector<TransformSpec> transforms = default_transform_grid();
    bool anchor_enabled = true;
    std::string anchor_id = "anchor";
    TransformSpec anchor_transform{224, 224, ColorMode::FullRgb};
    std::vector<double> precision_settings{0.91, 0.93, 0.95, 0.97, 0.99};
    double grid_step = 0.01;
    SyntheticCostConstants cost_constants;
    TransformSpec full_size{224, 224, ColorMode::FullRgb};
    std::uint64_t noise_seed = 42;
    std::uint64_t split_seed = 7;

    /// Grid models in arch-major order, followed by the anchor when enabled.
    std::vector<ModelSpec> models() const {
        auto out = enumerate_model_grid(arch, transforms);
        if (anchor_enabled) out.push_back(make_anchor_model(anchor_id, anchor_transform));
        validate_models(out);
        return out;
    }
};

inline GridConfig grid_config_from_json(const nlohmann::json& j) {
    GridConfig g;
    try {
        require(j.is_object(), "grid config must be a JSON object");
        if (j.contains("arch")) {
            const auto& a = j["arch"];
            if (a.contains("conv_layers")) g.arch.conv_layers = a["conv_layers"].get<std::vector<int>>();
            if (a.contains("conv_nodes")) g.arch.conv_nodes = a["conv_nodes"].get<std::vector<int>>();
            if (a.contains("dense_nodes")) g.arch.dense_nodes = a["dense_nodes"].get<std::vector<int>>();
        }
        if (j.contains("transform_list")) {
            g.transforms.clear();
            for (const auto& k : j["transform_list"]) g.transforms.push_back(parse_representation_key(k.get<std::string>()));
        } else if (j.contains("transforms")) {
            const auto& t = j["transforms"];
            auto sizes = t.value("sizes", std::vector<int>{30, 60, 120, 224});
            std::vector<ColorMode> modes(kAllColorModes.begin(), kAllColorModes.end());
            if (t.contains("color_modes")) {
                modes.clear();
                for (const auto& m : t["color_modes"]) modes.push_back(parse_color_mode(m.get<std::string>()));
            }
            g.transforms.clear();
            for (int s : sizes)
                for (auto m : modes) g.transforms.push_back({s, s, m});
        }
        if (j.contains("anchor")) {
            const auto& a = j["anchor"];
            g.anchor_enabled = a.value("enabled", true);
            g.anchor_id = a.value("model_id", g.anchor_id);
            if (a.contains("representation"))
                g.anchor_transform = parse_representation_key(a["representation"].get<std::string>());
        }
        if (j.contains("precision_settings")) g.precision_settings = j["precision_settings"].get<std::vector<double>>();
        g.grid_step = j.value("grid_step", g.grid_step);
        if (j.contains("cost_constants")) {
            const auto& c = j["cost_constants"];
            g.cost_constants.c0 = c.value("c0", g.cost_constants.c0);
            g.cost_constants.c1 = c.value("c1", g.cost_constants.c1);
            g.cost_constants.c2 = c.value("c2", g.cost_constants.c2);
            g.cost_constants.c3 = c.value("c3", g.cost_constants.c3);
        }
        if (j.contains("full_size")) g.full_size = parse_representation_key(j["full_size"].get<std::string>());
        if (j.contains("seeds")) {
            g.noise_seed = j["seeds"].value("noise", g.noise_seed);
            g.split_seed = j["seeds"].value("split", g.split_seed);
        }
    } catch (const nlohmann::json::exception& e) {
        fail(std::string("malformed grid config: ") + e.what());
    }
    require(!g.precision_settings.empty(), "grid config: precision_settings is empty");
    for (double p : g.precision_settings)
        require(p > 0.5 && p <= 1.0, "grid config: precision settings must lie in (0.5, 1]");
    threshold_grid(g.grid_step);  // validates the step
    return g;
}

inline GridConfig read_grid_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail_io("cannot open grid config " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(path.string() + " is not valid JSON: " + e.what());
    }
    return grid_config_from_json(j);
}

}  // namespace cascadeopt
