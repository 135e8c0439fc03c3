#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cascadeopt/common.hpp"
#include "cascadeopt/corpus.hpp"

namespace cascadeopt {

enum class ColorMode : std::uint8_t { FullRgb, Red, Green, Blue, Gray };

inline constexpr std::array<ColorMode, 5> kAllColorModes = {ColorMode::FullRgb, ColorMode::Red, ColorMode::Green,
                                                             ColorMode::Blue, ColorMode::Gray};

inline std::string_view to_string(ColorMode m) {
    switch (m) {
        case ColorMode::FullRgb: return "FULL_RGB";
        case ColorMode::Red: return "RED";
        case ColorMode::Green: return "GREEN";
        case ColorMode::Blue: return "BLUE";
        case ColorMode::Gray: return "GRAY";
    }
    return "?";
}

inline ColorMode parse_color_mode(std::string_view s) {
    for (auto m : kAllColorModes)
        if (to_string(m) == s) return m;
    fail("unknown color mode '" + std::string(s) + "'");
}

struct TransformSpec {
    int out_width = 0;
    int out_height = 0;
    ColorMode color_mode = ColorMode::FullRgb;

    int channels() const noexcept { return color_mode == ColorMode::FullRgb ? 3 : 1; }

    friend bool operator==(const TransformSpec&, const TransformSpec&) = default;
};

inline void validate(const TransformSpec& spec) {
    require(spec.out_width >= 1 && spec.out_height >= 1, "transform output dimensions must be at least 1x1");
}

/// Canonical "WxH:MODE" identity of a physical input representation. Two
/// models with equal keys consume pixel-identical inputs, so a cascade pays
/// for producing or loading a key at most once per image.
struct RepresentationKey {
    std::string value;

    friend bool operator==(const RepresentationKey&, const RepresentationKey&) = default;
    friend auto operator<=>(const RepresentationKey&, const RepresentationKey&) = default;
};

inline RepresentationKey representation_key(const TransformSpec& spec) {
    validate(spec);
    return {std::to_string(spec.out_width) + "x" + std::to_string(spec.out_height) + ":" +
            std::string(to_string(spec.color_mode))};
}

inline TransformSpec parse_representation_key(std::string_view key) {
    auto colon = key.find(':');
    auto x = key.find('x');
    require(colon != std::string_view::npos && x != std::string_view::npos && x < colon,
            "malformed representation key '" + std::string(key) + "'");
    TransformSpec spec;
    require(parse_int(key.substr(0, x), spec.out_width) && parse_int(key.substr(x + 1, colon - x - 1), spec.out_height),
            "malformed representation key '" + std::string(key) + "'");
    spec.color_mode = parse_color_mode(key.substr(colon + 1));
    validate(spec);
    return spec;
}

inline std::uint64_t input_value_count(const TransformSpec& spec) {
    validate(spec);
    return static_cast<std::uint64_t>(spec.out_width) * static_cast<std::uint64_t>(spec.out_height) *
           static_cast<std::uint64_t>(spec.channels());
}

/// The 4 resolutions x 5 color modes used by the default model grid.
inline std::vector<TransformSpec> default_transform_grid() {
    std::vector<TransformSpec> out;
    for (int size : {30, 60, 120, 224})
        for (auto mode : kAllColorModes) out.push_back({size, size, mode});
    return out;
}

namespace detail {

inline std::uint8_t round_half_up(double v) {
    double r = std::floor(v + 0.5);
    if (r < 0) r = 0;
    if (r > 255) r = 255;
    return static_cast<std::uint8_t>(r);
}

/// BT.601 luma with round-half-up, in exact integer arithmetic.
inline std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    return static_cast<std::uint8_t>((299u * r + 587u * g + 114u * b + 500u) / 1000u);
}

/// Bilinear resample of one plane with half-pixel centers and edge clamping.
// Sample positions are (2x+1)*in/(2*out) - 1/2, a rational with denominator
// 2*out, so the whole interpolation runs in integers and rounds half up exactly.
inline void resize_plane(const std::uint8_t* src, int in_w, int in_h, std::uint8_t* dst, int out_w, int out_h) {
    const std::int64_t dx = 2 * static_cast<std::int64_t>(out_w);
    const std::int64_t dy = 2 * static_cast<std::int64_t>(out_h);
    std::vector<int> x0(static_cast<std::size_t>(out_w)), x1(static_cast<std::size_t>(out_w));
    std::vector<std::int64_t> rx(static_cast<std::size_t>(out_w));
    for (int x = 0; x < out_w; ++x) {
        const std::int64_t num = std::clamp<std::int64_t>((2 * x + 1) * std::int64_t{in_w} - out_w, 0, (in_w - 1) * dx);
        auto i = static_cast<std::size_t>(x);
        x0[i] = static_cast<int>(num / dx);
        x1[i] = std::min(x0[i] + 1, in_w - 1);
        rx[i] = num - x0[i] * dx;
    }
    const std::int64_t denom = dx * dy;
    for (int y = 0; y < out_h; ++y) {
        const std::int64_t num = std::clamp<std::int64_t>((2 * y + 1) * std::int64_t{in_h} - out_h, 0, (in_h - 1) * dy);
        const int y0 = static_cast<int>(num / dy);
        const int y1 = std::min(y0 + 1, in_h - 1);
        const std::int64_t ry = num - y0 * dy;
        const std::uint8_t* row0 = src + static_cast<std::size_t>(y0) * static_cast<std::size_t>(in_w);
        const std::uint8_t* row1 = src + static_cast<std::size_t>(y1) * static_cast<std::size_t>(in_w);
        std::uint8_t* out = dst + static_cast<std::size_t>(y) * static_cast<std::size_t>(out_w);
        for (int x = 0; x < out_w; ++x) {
            auto i = static_cast<std::size_t>(x);
            const std::int64_t top = (dx - rx[i]) * row0[x0[i]] + rx[i] * row0[x1[i]];
            const std::int64_t bottom = (dx - rx[i]) * row1[x0[i]] + rx[i] * row1[x1[i]];
            const std::int64_t v = (dy - ry) * top + ry * bottom;
            out[x] = static_cast<std::uint8_t>((2 * v + denom) / (2 * denom));
        }
    }
}

}  // namespace detail

/// Channel reduction followed by bilinear resize. Single-channel inputs accept
/// only GRAY, which passes the channel through unchanged.
inline ImageRecord apply_transform(const ImageRecord& image, const TransformSpec& spec) {
    validate(spec);
    const std::string tag = "image " + std::to_string(image.id);
    require(image.channels == 1 || image.channels == 3, tag + ": unsupported channel count");
    require(image.pixels.size() == image.plane_size() * static_cast<std::size_t>(image.channels),
            tag + ": pixel buffer length mismatch");
    if (image.channels == 1)
        require(spec.color_mode == ColorMode::Gray,
                tag + ": single-channel input cannot produce " + std::string(to_string(spec.color_mode)));

    const std::size_t plane = image.plane_size();
    std::vector<std::uint8_t> reduced;
    const int channels = spec.channels();
    if (image.channels == 1 || spec.color_mode == ColorMode::FullRgb) {
        reduced = image.pixels;
    } else if (spec.color_mode == ColorMode::Gray) {
        reduced.resize(plane);
        for (std::size_t p = 0; p < plane; ++p)
            reduced[p] = detail::luma(image.pixels[p], image.pixels[plane + p], image.pixels[2 * plane + p]);
    } else {
        const std::size_t c = spec.color_mode == ColorMode::Red ? 0 : (spec.color_mode == ColorMode::Green ? 1 : 2);
        reduced.assign(image.pixels.begin() + static_cast<std::ptrdiff_t>(c * plane),
                       image.pixels.begin() + static_cast<std::ptrdiff_t>((c + 1) * plane));
    }

    ImageRecord out;
    out.id = image.id;
    out.label = image.label;
    out.latent_difficulty = image.latent_difficulty;
    out.width = spec.out_width;
    out.height = spec.out_height;
    out.channels = channels;
    if (spec.out_width == image.width && spec.out_height == image.height) {
        out.pixels = std::move(reduced);
        return out;
    }
    const std::size_t out_plane = out.plane_size();
    out.pixels.resize(out_plane * static_cast<std::size_t>(channels));
    for (int c = 0; c < channels; ++c)
        detail::resize_plane(reduced.data() + static_cast<std::size_t>(c) * plane, image.width, image.height,
                             out.pixels.data() + static_cast<std::size_t>(c) * out_plane, out.width, out.height);
    return out;
}

}  // namespace cascadeopt
