#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <string>
#include <tuple>
#include <unordered_set>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "cascadeopt/common.hpp"
#include "cascadeopt/pnm.hpp"

namespace cascadeopt {

/// One labeled image. Pixels are row-major and planar by channel.
struct ImageRecord {
    std::uint64_t id = 0;
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<std::uint8_t> pixels;
    Label label = Label::Negative;
    /// Only synthetic corpora carry this; the synthetic scorer requires it.
    std::optional<double> latent_difficulty;

    std::size_t plane_size() const noexcept {
        return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    }

    friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

struct LabeledDataset {
    std::string name;
    std::vector<ImageRecord> images;

    std::size_t size() const noexcept { return images.size(); }

    std::size_t positive_count() const noexcept {
        return static_cast<std::size_t>(
            std::count_if(images.begin(), images.end(), [](const ImageRecord& r) { return is_positive(r.label); }));
    }
};

/// Checks the dataset invariants; throws naming the first offending image.
inline void validate_dataset(const LabeledDataset& ds) {
    require(!ds.images.empty(), "dataset '" + ds.name + "' is empty");
    const auto& first = ds.images.front();
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(ds.images.size());
    for (const auto& img : ds.images) {
        const std::string tag = "image " + std::to_string(img.id);
        require(img.channels == 1 || img.channels == 3, tag + ": channels must be 1 or 3");
        require(img.width >= 1 && img.height >= 1, tag + ": non-positive dimensions");
        require(img.pixels.size() == img.plane_size() * static_cast<std::size_t>(img.channels),
                tag + ": pixel buffer length does not match width x height x channels");
        require(img.width == first.width && img.height == first.height && img.channels == first.channels,
                tag + ": dimensions differ from the rest of the dataset");
        require(seen.insert(img.id).second, tag + ": duplicate id");
        if (img.latent_difficulty)
            require(*img.latent_difficulty >= 0.0 && *img.latent_difficulty <= 1.0,
                    tag + ": latent_difficulty outside [0,1]");
    }
}

namespace detail {
inline constexpr std::uint64_t kLabelTag = 0x6c6162656cULL;       // "label"
inline constexpr std::uint64_t kDifficultyTag = 0x6469666669ULL;  // "diffi"
inline constexpr std::uint64_t kSplitTag = 0x73706c6974ULL;       // "split"

inline std::uint8_t clamp_byte(int v) { return static_cast<std::uint8_t>(std::clamp(v, 0, 255)); }
}  // namespace detail

/// Deterministic synthetic corpus. Exactly round(count * positive_fraction)
/// images are positive; each image's latent difficulty is a uniform draw keyed
/// by (seed, id). Brighter images are positive, with contrast shrinking as
/// difficulty grows.
inline LabeledDataset generate_synthetic_corpus(std::uint64_t seed, int count, int width, int height,
                                                double positive_fraction) {
    require(count >= 2, "synthetic corpus: count must be at least 2");
    require(width >= 1 && height >= 1, "synthetic corpus: width and height must be at least 1");
    require(positive_fraction > 0.0 && positive_fraction < 1.0,
            "synthetic corpus: positive_fraction must lie in (0, 1)");

    const auto n = static_cast<std::size_t>(count);
    const auto positives = static_cast<std::size_t>(std::llround(static_cast<double>(count) * positive_fraction));

    // positives are the ids with the smallest label hashes
    std::vector<std::uint64_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [seed](std::uint64_t a, std::uint64_t b) {
        auto ha = hash_values(seed, detail::kLabelTag, a);
        auto hb = hash_values(seed, detail::kLabelTag, b);
        return ha != hb ? ha < hb : a < b;
    });
    std::vector<Label> labels(n, Label::Negative);
    for (std::size_t k = 0; k < positives; ++k) labels[order[k]] = Label::Positive;

    LabeledDataset ds;
    ds.name = "synthetic-" + std::to_string(seed);
    ds.images.reserve(n);
    const std::size_t plane = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    for (std::size_t i = 0; i < n; ++i) {
        ImageRecord img;
        img.id = i;
        img.width = width;
        img.height = height;
        img.channels = 3;
        img.label = labels[i];
        const double d = unit_interval(hash_values(seed, detail::kDifficultyTag, i));
        img.latent_difficulty = d;

        const int sign = is_positive(img.label) ? 1 : -1;
        const int base = 128 + static_cast<int>(std::lround(sign * 48.0 * (1.0 - d)));
        img.pixels.resize(plane * 3);
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                const int texture = static_cast<int>((x * 5 + y * 3 + (x * y) % 7 + static_cast<int>(i % 24)) % 24) - 12;
                const std::size_t p = static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
                img.pixels[p] = detail::clamp_byte(base + texture + 12);
                img.pixels[plane + p] = detail::clamp_byte(base + texture);
                img.pixels[2 * plane + p] = detail::clamp_byte(base + texture - 12);
            }
        }
        ds.images.push_back(std::move(img));
    }
    return ds;
}

struct SplitSpec {
    double train_fraction = 0.5;
    double config_fraction = 0.25;
    double eval_fraction = 0.25;
    std::uint64_t seed = 0;
};

struct DatasetSplits {
    LabeledDataset train;
    LabeledDataset config;
    LabeledDataset eval;
};

/// Sizes of the three splits for n images: train and config are rounded, eval
/// absorbs the remainder.
inline std::tuple<std::size_t, std::size_t, std::size_t> split_sizes(std::size_t n, const SplitSpec& spec) {
    require(spec.train_fraction > 0 && spec.config_fraction > 0 && spec.eval_fraction > 0,
            "split fractions must be positive");
    require(std::abs(spec.train_fraction + spec.config_fraction + spec.eval_fraction - 1.0) <= 1e-9,
            "split fractions must sum to 1");
    const auto train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * spec.train_fraction));
    const auto config = static_cast<std::size_t>(std::llround(static_cast<double>(n) * spec.config_fraction));
    require(train >= 1, "train split would receive 0 images");
    require(config >= 1, "config split would receive 0 images");
    require(train + config < n, "eval split would receive 0 images");
    return {train, config, n - train - config};
}

/// Stratified, seeded three-way split. Each class is shuffled by a hash of
/// (seed, id), the two classes are interleaved so that every prefix holds
/// floor(prefix * P / n) positives, and the interleaved sequence is cut into
/// consecutive train/config/eval runs. Any contiguous run therefore holds a
/// positive count within one image of its proportional share.
inline DatasetSplits split_dataset(const LabeledDataset& dataset, const SplitSpec& spec) {
    require(dataset.size() >= 3, "split_dataset: need at least 3 images");
    const std::size_t n = dataset.size();
    auto [n_train, n_config, n_eval] = split_sizes(n, spec);

    std::vector<std::size_t> pos_idx, neg_idx;
    for (std::size_t i = 0; i < n; ++i)
        (is_positive(dataset.images[i].label) ? pos_idx : neg_idx).push_back(i);
    auto shuffle = [&](std::vector<std::size_t>& v) {
        std::sort(v.begin(), v.end(), [&](std::size_t a, std::size_t b) {
            auto ha = hash_values(spec.seed, detail::kSplitTag, dataset.images[a].id);
            auto hb = hash_values(spec.seed, detail::kSplitTag, dataset.images[b].id);
            return ha != hb ? ha < hb : dataset.images[a].id < dataset.images[b].id;
        });
    };
    shuffle(pos_idx);
    shuffle(neg_idx);

    const std::size_t P = pos_idx.size();
    std::vector<std::size_t> sequence;
    sequence.reserve(n);
    std::size_t next_pos = 0, next_neg = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const bool take_pos = (i + 1) * P / n > i * P / n;
        sequence.push_back(take_pos ? pos_idx[next_pos++] : neg_idx[next_neg++]);
    }

    DatasetSplits out;
    out.train.name = dataset.name + "/train";
    out.config.name = dataset.name + "/config";
    out.eval.name = dataset.name + "/eval";
    for (std::size_t k = 0; k < n; ++k) {
        auto& target = k < n_train ? out.train : (k < n_train + n_config ? out.config : out.eval);
        target.images.push_back(dataset.images[sequence[k]]);
    }
    (void)n_eval;
    return out;
}

// ---------------------------------------------------------------------------
// On-disk corpus: a JSON manifest of {id, path, label} plus one PGM/PPM per image.
// ---------------------------------------------------------------------------

/// Writes `dir/manifest.json` and one image file per record. Latent difficulty,
/// when present, is stored as an extra manifest field so synthetic scoring
/// survives the round trip.
inline std::filesystem::path write_corpus(const LabeledDataset& dataset, const std::filesystem::path& dir) {
    validate_dataset(dataset);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail_io("cannot create directory " + dir.string() + ": " + ec.message());
    nlohmann::json manifest = nlohmann::json::array();
    for (const auto& img : dataset.images) {
        const std::string file = "img_" + std::to_string(img.id) + (img.channels == 1 ? ".pgm" : ".ppm");
        pnm::write(dir / file, img.width, img.height, img.channels, img.pixels);
        nlohmann::json entry = {{"id", img.id}, {"path", file}, {"label", is_positive(img.label) ? 1 : 0}};
        if (img.latent_difficulty) entry["latent_difficulty"] = *img.latent_difficulty;
        manifest.push_back(std::move(entry));
    }
    const auto path = dir / "manifest.json";
    std::ofstream out(path);
    if (!out) fail_io("cannot write manifest " + path.string());
    out << manifest.dump(1) << '\n';
    return path;
}

inline LabeledDataset load_corpus(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) fail_io("cannot open manifest " + manifest_path.string());
    nlohmann::json manifest;
    try {
        in >> manifest;
    } catch (const nlohmann::json::exception& e) {
        fail("manifest " + manifest_path.string() + " is not valid JSON: " + e.what());
    }
    require(manifest.is_array(), "manifest " + manifest_path.string() + " must be a JSON array");

    LabeledDataset ds;
    ds.name = manifest_path.parent_path().filename().string();
    const auto base = manifest_path.parent_path();
    for (const auto& entry : manifest) {
        require(entry.is_object() && entry.contains("id") && entry.contains("path") && entry.contains("label"),
                "manifest entry missing id/path/label: " + entry.dump());
        require(entry["id"].is_number_unsigned(), "manifest entry has a non-integer id: " + entry.dump());
        ImageRecord img;
        img.id = entry["id"].get<std::uint64_t>();
        const std::string tag = "image " + std::to_string(img.id);
        require(entry["path"].is_string(), tag + ": path must be a string");
        require(entry["label"].is_number_integer(), tag + ": label must be 0 or 1");
        const int label = entry["label"].get<int>();
        require(label == 0 || label == 1, tag + ": label must be 0 or 1");
        img.label = label == 1 ? Label::Positive : Label::Negative;
        if (entry.contains("latent_difficulty")) {
            require(entry["latent_difficulty"].is_number(), tag + ": latent_difficulty must be a number");
            img.latent_difficulty = entry["latent_difficulty"].get<double>();
        }
        std::filesystem::path p = entry["path"].get<std::string>();
        if (p.is_relative()) p = base / p;
        if (!std::filesystem::exists(p)) fail_io(tag + ": missing image file " + p.string());
        pnm::Raster r;
        try {
            r = pnm::read(p);
        } catch (const Error& e) {
            throw Error(e.kind(), tag + ": " + e.what());
        }
        img.width = r.width;
        img.height = r.height;
        img.channels = r.channels;
        img.pixels = std::move(r.pixels);
        ds.images.push_back(std::move(img));
    }
    validate_dataset(ds);
    return ds;
}

// ---------------------------------------------------------------------------
// Split label file: which images went where, with their ground truth.
//   {"train": {"image_ids": [...], "labels": [0|1, ...]}, "config": {...}, "eval": {...}}
// ---------------------------------------------------------------------------

inline void write_split_labels(const DatasetSplits& splits, const std::filesystem::path& path) {
    nlohmann::json j = nlohmann::json::object();
    auto put = [&](const char* key, const LabeledDataset& ds) {
        nlohmann::json ids = nlohmann::json::array(), labels = nlohmann::json::array();
        for (const auto& img : ds.images) {
            ids.push_back(img.id);
            labels.push_back(is_positive(img.label) ? 1 : 0);
        }
        j[key] = {{"image_ids", ids}, {"labels", labels}};
    };
    put("train", splits.train);
    put("config", splits.config);
    put("eval", splits.eval);
    std::ofstream out(path);
    if (!out) fail_io("cannot write " + path.string());
    out << j.dump(1) << '\n';
}

/// Image id -> label for one split ("train", "config" or "eval").
inline std::unordered_map<std::uint64_t, Label> read_split_labels(const std::filesystem::path& path,
                                                                  const std::string& split) {
    std::ifstream in(path);
    if (!in) fail_io("cannot open split label file " + path.string());
    std::unordered_map<std::uint64_t, Label> out;
    try {
        nlohmann::json j;
        in >> j;
        require(j.is_object() && j.contains(split), path.string() + ": no '" + split + "' split");
        const auto ids = j[split].at("image_ids").get<std::vector<std::uint64_t>>();
        const auto labels = j[split].at("labels").get<std::vector<int>>();
        require(ids.size() == labels.size(), path.string() + ": '" + split + "' ids and labels differ in length");
        for (std::size_t i = 0; i < ids.size(); ++i) {
            require(labels[i] == 0 || labels[i] == 1, path.string() + ": labels must be 0 or 1");
            require(out.emplace(ids[i], labels[i] == 1 ? Label::Positive : Label::Negative).second,
                    path.string() + ": duplicate image id " + std::to_string(ids[i]));
        }
    } catch (const nlohmann::json::exception& e) {
        fail(path.string() + ": malformed split label file: " + e.what());
    }
    return out;
}

}  // namespace cascadeopt
