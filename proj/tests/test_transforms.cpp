#include <random>
#include <set>

#include <gtest/gtest.h>

#include "cascadeopt/transforms.hpp"
#include "oracles.hpp"

using namespace cascadeopt;

namespace {

ImageRecord uniform_rgb(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    ImageRecord img{7, w, h, 3, {}, Label::Positive, 0.25};
    const auto plane = img.plane_size();
    img.pixels.resize(plane * 3);
    std::fill_n(img.pixels.begin(), plane, r);
    std::fill_n(img.pixels.begin() + static_cast<std::ptrdiff_t>(plane), plane, g);
    std::fill_n(img.pixels.begin() + static_cast<std::ptrdiff_t>(2 * plane), plane, b);
    return img;
}

ImageRecord random_image(std::mt19937_64& rng, int w, int h, int channels) {
    ImageRecord img{1, w, h, channels, {}, Label::Negative, std::nullopt};
    img.pixels.resize(img.plane_size() * static_cast<std::size_t>(channels));
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng() & 0xff);
    return img;
}

}  // namespace

TEST(Transforms, IdentityKeepsPixelsAndMetadata) {
    std::mt19937_64 rng(1);
    auto img = random_image(rng, 9, 5, 3);
    img.latent_difficulty = 0.3;
    const auto out = apply_transform(img, {9, 5, ColorMode::FullRgb});
    EXPECT_EQ(out, img);
}

TEST(Transforms, GrayOfUniformImage) {
    const auto out = apply_transform(uniform_rgb(8, 8, 10, 20, 30), {8, 8, ColorMode::Gray});
    EXPECT_EQ(out.channels, 1);
    for (auto p : out.pixels) EXPECT_EQ(p, 18);
}

TEST(Transforms, SingleChannelSelection) {
    std::mt19937_64 rng(2);
    const auto img = random_image(rng, 6, 4, 3);
    const auto plane = img.plane_size();
    for (auto [mode, c] : {std::pair{ColorMode::Red, 0u}, {ColorMode::Green, 1u}, {ColorMode::Blue, 2u}}) {
        const auto out = apply_transform(img, {6, 4, mode});
        ASSERT_EQ(out.pixels.size(), plane);
        for (std::size_t p = 0; p < plane; ++p) EXPECT_EQ(out.pixels[p], img.pixels[c * plane + p]);
    }
}

TEST(Transforms, RampDownsampleMatchesReference) {
    ImageRecord img{1, 4, 4, 1, {}, Label::Negative, std::nullopt};
    for (int i = 0; i < 16; ++i) img.pixels.push_back(static_cast<std::uint8_t>(i * 16));
    const auto out = apply_transform(img, {2, 2, ColorMode::Gray});
    EXPECT_EQ(out.pixels, oracle::bilinear(img.pixels, 4, 4, 2, 2));
    // half-pixel centres land exactly between source pixels: mean of each 2x2 block
    EXPECT_EQ(out.pixels, (std::vector<std::uint8_t>{40, 72, 168, 200}));
}

TEST(Transforms, RandomResizesMatchReference) {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> dim(1, 40);
    for (int trial = 0; trial < 300; ++trial) {
        const int w = dim(rng), h = dim(rng), ow = dim(rng), oh = dim(rng);
        const auto img = random_image(rng, w, h, 1);
        const auto out = apply_transform(img, {ow, oh, ColorMode::Gray});
        ASSERT_EQ(out.pixels, oracle::bilinear(img.pixels, w, h, ow, oh)) << w << "x" << h << " -> " << ow << "x" << oh;
    }
}

TEST(Transforms, RgbResizeIsPerPlane) {
    std::mt19937_64 rng(12);
    const auto img = random_image(rng, 13, 7, 3);
    const auto out = apply_transform(img, {5, 9, ColorMode::FullRgb});
    for (std::size_t c = 0; c < 3; ++c) {
        std::vector<std::uint8_t> plane(img.pixels.begin() + static_cast<std::ptrdiff_t>(c * 91),
                                        img.pixels.begin() + static_cast<std::ptrdiff_t>((c + 1) * 91));
        std::vector<std::uint8_t> got(out.pixels.begin() + static_cast<std::ptrdiff_t>(c * 45),
                                      out.pixels.begin() + static_cast<std::ptrdiff_t>((c + 1) * 45));
        EXPECT_EQ(got, oracle::bilinear(plane, 13, 7, 5, 9));
    }
}

TEST(Transforms, KeysAreCanonicalAndParse) {
    EXPECT_EQ(representation_key({30, 30, ColorMode::Red}).value, "30x30:RED");
    EXPECT_EQ(representation_key({224, 120, ColorMode::FullRgb}).value, "224x120:FULL_RGB");
    for (const auto& t : default_transform_grid()) EXPECT_EQ(parse_representation_key(representation_key(t).value), t);
    EXPECT_THROW(parse_representation_key("30:RED"), Error);
    EXPECT_THROW(parse_representation_key("30x30:PURPLE"), Error);
    EXPECT_THROW(parse_representation_key("0x30:RED"), Error);
}

TEST(Transforms, DefaultGridHasTwentyDistinctKeys) {
    std::set<std::string> keys;
    for (const auto& t : default_transform_grid()) keys.insert(representation_key(t).value);
    EXPECT_EQ(keys.size(), 20u);
}

TEST(Transforms, InputValueCounts) {
    EXPECT_EQ(input_value_count({30, 30, ColorMode::FullRgb}), 2700u);
    EXPECT_EQ(input_value_count({224, 224, ColorMode::FullRgb}), 150528u);
    EXPECT_EQ(input_value_count({1, 1, ColorMode::Blue}), 1u);
}

TEST(Transforms, SingleChannelInputOnlyAcceptsGray) {
    ImageRecord img{3, 2, 2, 1, {1, 2, 3, 4}, Label::Negative, std::nullopt};
    EXPECT_NO_THROW(apply_transform(img, {1, 1, ColorMode::Gray}));
    try {
        apply_transform(img, {2, 2, ColorMode::Red});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Validation);
        EXPECT_NE(std::string(e.what()).find("image 3"), std::string::npos);
    }
    EXPECT_THROW(apply_transform(img, {0, 2, ColorMode::Gray}), Error);
}
