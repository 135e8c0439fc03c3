#include <fstream>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "cascadeopt/models.hpp"
#include "oracles.hpp"

using namespace cascadeopt;

TEST(ModelGrid, DefaultSizeAndIds) {
    const auto grid = enumerate_model_grid({}, default_transform_grid());
    EXPECT_EQ(grid.size(), 360u);
    std::set<std::string> ids;
    for (const auto& m : grid) ids.insert(m.model_id);
    EXPECT_EQ(ids.size(), 360u);
    EXPECT_EQ(grid.front().model_id, "l1-c16-d16_30x30_FULL_RGB");
    EXPECT_NO_THROW(validate_models(grid));
}

TEST(ModelGrid, SingletonAndSmallGrids) {
    EXPECT_EQ(enumerate_model_grid({{1}, {16}, {16}}, {{30, 30, ColorMode::Gray}}).size(), 1u);
    const auto g = enumerate_model_grid({{1, 2}, {16}, {16}}, {{30, 30, ColorMode::Gray}, {60, 60, ColorMode::Red}});
    ASSERT_EQ(g.size(), 4u);
    std::set<std::string> ids;
    for (const auto& m : g) ids.insert(m.model_id);
    EXPECT_EQ(ids.size(), 4u);
}

TEST(ModelGrid, DuplicateOptionsRejected) {
    EXPECT_THROW(enumerate_model_grid({{1, 1}, {16}, {16}}, {{30, 30, ColorMode::Gray}}), Error);
    EXPECT_THROW(enumerate_model_grid({{1}, {16}, {16}}, {{30, 30, ColorMode::Gray}, {30, 30, ColorMode::Gray}}), Error);
    auto models = enumerate_model_grid({{1}, {16}, {16}}, {{30, 30, ColorMode::Gray}});
    models.push_back(models.front());
    EXPECT_THROW(validate_models(models), Error);
    EXPECT_THROW(validate_models({ModelSpec{"a,b", {}, {1, 1, ColorMode::Gray}, false}}), Error);
}

TEST(ModelRegistry, JsonRoundTrip) {
    oracle::TempDir dir("models");
    auto models = enumerate_model_grid({{1, 4}, {32}, {32}}, default_transform_grid());
    models.push_back(make_anchor_model());
    write_models(models, dir / "models.json");
    EXPECT_EQ(read_models(dir / "models.json"), models);
}

TEST(SyntheticScorer, AnchorEasyImageValue) {
    // q = 1, d = 0, positive: sigmoid(4 + eps) with eps from the per-pair hash
    const auto anchor = make_anchor_model();
    ImageRecord img{5, 1, 1, 3, {0, 0, 0}, Label::Positive, 0.0};
    const double eps = synthetic_noise(42, "anchor", 5);
    const double expect = 1.0 / (1.0 + std::exp(-(4.0 + eps)));
    EXPECT_DOUBLE_EQ(synthetic_score(anchor, img, 42), expect);
    EXPECT_NEAR(1.0 / (1.0 + std::exp(-4.0)), 0.9820, 5e-5);
    EXPECT_GE(eps, -0.75);
    EXPECT_LE(eps, 0.75);
}

TEST(SyntheticScorer, QualityIncreasesWithInputsAndCapacity) {
    const ArchSpec small{1, 16, 16}, big{4, 32, 64};
    double prev = 0;
    for (int size : {30, 60, 120, 224}) {
        ModelSpec m{"x", small, {size, size, ColorMode::Gray}, false};
        const double q = synthetic_quality(m);
        EXPECT_GT(q, prev);
        prev = q;
        ModelSpec b{"y", big, {size, size, ColorMode::Gray}, false};
        EXPECT_GT(synthetic_quality(b), q);
        EXPECT_LE(synthetic_quality(b), 1.0);
    }
    EXPECT_DOUBLE_EQ(synthetic_quality({"z", big, {224, 224, ColorMode::FullRgb}, false}), 1.0);
}

TEST(SyntheticScorer, DeterministicAndRequiresDifficulty) {
    const auto grid = enumerate_model_grid({{1}, {16}, {16}}, {{30, 30, ColorMode::Gray}});
    const auto ds = generate_synthetic_corpus(1, 20, 4, 4, 0.5);
    SyntheticScorer a(42), b(42), c(43);
    int differ = 0;
    for (const auto& img : ds.images) {
        EXPECT_EQ(a.score(grid[0], img), b.score(grid[0], img));
        differ += a.score(grid[0], img) != c.score(grid[0], img);
    }
    EXPECT_GT(differ, 0);
    ImageRecord bare{1, 1, 1, 3, {0, 0, 0}, Label::Positive, std::nullopt};
    EXPECT_THROW(a.score(grid[0], bare), Error);
}

TEST(ScoreDataset, CellsMatchDirectScoringAndCallCount) {
    auto models = enumerate_model_grid({{1, 2}, {16}, {16}}, {{8, 8, ColorMode::Red}, {4, 4, ColorMode::Gray}});
    models.push_back(make_anchor_model());
    const auto ds = generate_synthetic_corpus(3, 37, 8, 8, 0.4);
    SyntheticScorer inner(9);
    CountingScorer counter(inner);
    const auto m = score_dataset(counter, models, ds);
    EXPECT_EQ(counter.calls(), models.size() * ds.size());
    ASSERT_EQ(m.model_count(), models.size());
    for (std::size_t i = 0; i < models.size(); ++i)
        for (std::size_t j = 0; j < ds.size(); ++j) {
            const double z = kSyntheticGain * synthetic_quality(models[i]) *
                                 (is_positive(ds.images[j].label) ? 1.0 : -1.0) *
                                 (1.0 - *ds.images[j].latent_difficulty) +
                             synthetic_noise(9, models[i].model_id, ds.images[j].id);
            EXPECT_DOUBLE_EQ(m.at(i, j), 1.0 / (1.0 + std::exp(-z)));
        }
    const auto labels = labels_for(m, ds);
    for (std::size_t j = 0; j < ds.size(); ++j) EXPECT_EQ(labels[j], ds.images[j].label);
}

TEST(ScoreDataset, FailingBackendNamesThePair) {
    struct Bad final : ScorerBackend {
        double score(const ModelSpec&, const ImageRecord& img) const override { return img.id == 3 ? 1.5 : 0.5; }
    } bad;
    const auto models = enumerate_model_grid({{1}, {16}, {16}}, {{4, 4, ColorMode::Gray}});
    const auto ds = generate_synthetic_corpus(1, 5, 4, 4, 0.5);
    try {
        score_dataset(bad, models, ds);
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("image 3"), std::string::npos);
    }
}

TEST(ScoreMatrixFile, RoundTripIsExact) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0, 1);
    ScoreMatrix m("eval", {"a", "b", "c"}, {10, 11, 12, 99});
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 4; ++j) m.set(i, j, u(rng));
    m.set(0, 0, 0.0);
    m.set(2, 3, 1.0);
    std::stringstream ss;
    write_score_matrix(m, ss);
    EXPECT_EQ(read_score_matrix(ss, "mem"), m);
}

TEST(ScoreMatrixFile, OutOfRangeScoreNamesRowAndColumn) {
    std::istringstream in("split,eval\n1,2,3\nalpha,0.1,0.2,0.3\nbeta,0.4,1.5,0.6\n");
    try {
        read_score_matrix(in, "bad.csv");
        FAIL();
    } catch (const Error& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("bad.csv:4"), std::string::npos) << msg;
        EXPECT_NE(msg.find("row 'beta'"), std::string::npos) << msg;
        EXPECT_NE(msg.find("column 2"), std::string::npos) << msg;
    }
}

TEST(ScoreMatrixFile, StructuralErrors) {
    for (const char* text : {"", "eval\n1\n", "split,eval\n1,x\n", "split,eval\n1,1\na,0.1,0.2\n",
                             "split,eval\n1,2\na,0.1\n", "split,eval\n1,2\n", "split,eval\n1,2\na,0.1,0.2\na,0.3,0.4\n"}) {
        std::istringstream in(text);
        EXPECT_THROW(read_score_matrix(in, "t"), Error) << text;
    }
}

TEST(ScoreMatrixFile, AdapterGoldenFixtureLoads) {
    const std::filesystem::path data = CASCADEOPT_TEST_DATA;
    const auto eval = read_score_matrix(data / "adapter" / "eval_scores.csv");
    const auto models = read_models(data / "adapter" / "models.json");
    EXPECT_EQ(eval.split_name(), "eval");
    ASSERT_EQ(eval.model_count(), models.size());
    for (const auto& m : models) EXPECT_TRUE(eval.has_model(m.model_id));
    const auto labels = labels_for(eval, read_split_labels(data / "adapter" / "splits.json", "eval"));
    EXPECT_EQ(labels.size(), eval.image_count());
    FileScorer scorer({eval});
    ImageRecord img{eval.image_ids()[1], 1, 1, 1, {0}, Label::Negative, std::nullopt};
    EXPECT_EQ(scorer.score(models[0], img), eval.at(eval.model_row(models[0].model_id), 1));
    img.id = 123456789;
    EXPECT_THROW(scorer.score(models[0], img), Error);
}
