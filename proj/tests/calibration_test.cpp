#include <gtest/gtest.h>

#include <algorithm>

#include "support/scenes.hpp"
#include "trapsight/calibration.hpp"
#include "trapsight/detector.hpp"
#include "trapsight/errors.hpp"
#include "trapsight/imaging.hpp"

using namespace trapsight;
using trapsight::testing::binary_with_rects;
using trapsight::testing::gray_frame;
using trapsight::testing::Rect;

namespace {

CorpusSample uniform_sample(int level, const std::string& cls) {
  return {GrayImage(4, 4, static_cast<std::uint8_t>(level)), binary_with_rects(4, 4, {Rect{0, 0, 2, 2}}), cls};
}

GrayscaleStats stats_of(const std::string& cls, double mean, int max) {
  GrayscaleStats s;
  s.class_name = cls;
  s.mean = mean;
  s.max = max;
  s.min = 0;
  return s;
}

}  // namespace

TEST(GrayscaleStats, MeanOverMaskedPixels) {
  GrayImage img(4, 1, std::vector<std::uint8_t>{100, 140, 250, 250});
  BinaryImage mask(4, 1, std::vector<std::uint8_t>{255, 255, 0, 0});
  std::vector<CorpusSample> corpus{{img, mask, "leaf"}};
  auto report = grayscale_stats(corpus);
  ASSERT_EQ(report.classes.size(), 1u);
  const auto& s = report.classes[0];
  EXPECT_EQ(s.class_name, "leaf");
  EXPECT_DOUBLE_EQ(s.mean, 120.0);
  EXPECT_EQ(s.min, 100);
  EXPECT_EQ(s.max, 140);
  EXPECT_EQ(s.pixel_count, 2u);
  EXPECT_EQ(s.sample_count, 1u);
}

TEST(GrayscaleStats, ClassesInFirstAppearanceOrder) {
  std::vector<CorpusSample> corpus{uniform_sample(30, "weevil"), uniform_sample(100, "soil"),
                                   uniform_sample(40, "weevil")};
  auto report = grayscale_stats(corpus);
  ASSERT_EQ(report.classes.size(), 2u);
  EXPECT_EQ(report.classes[0].class_name, "weevil");
  EXPECT_DOUBLE_EQ(report.classes[0].mean, 35.0);
  EXPECT_EQ(report.classes[0].sample_count, 2u);
  EXPECT_EQ(report.classes[1].class_name, "soil");
}

TEST(GrayscaleStats, RejectsEmptyAndMisshapenMasks) {
  std::vector<CorpusSample> corpus{uniform_sample(30, "weevil"),
                                   {GrayImage(4, 4, std::uint8_t{9}), BinaryImage(4, 4), "weevil"},
                                   {GrayImage(4, 4, std::uint8_t{9}), BinaryImage(3, 4), "weevil"}};
  auto report = grayscale_stats(corpus);
  ASSERT_EQ(report.rejected.size(), 2u);
  EXPECT_EQ(report.rejected[0].index, 1u);
  EXPECT_EQ(report.rejected[1].index, 2u);
  EXPECT_DOUBLE_EQ(report.classes[0].mean, 30.0);
}

TEST(GrayscaleStats, PermutationInvariantMeans) {
  auto corpus = synthetic_corpus({10, 32, 24, 4});
  auto a = grayscale_stats(corpus);
  std::reverse(corpus.begin(), corpus.end());
  auto b = grayscale_stats(corpus);
  for (const auto& sa : a.classes) {
    auto it = std::find_if(b.classes.begin(), b.classes.end(), [&](const auto& s) { return s.class_name == sa.class_name; });
    ASSERT_NE(it, b.classes.end());
    EXPECT_NEAR(it->mean, sa.mean, 1e-9);
    EXPECT_EQ(it->min, sa.min);
    EXPECT_EQ(it->max, sa.max);
  }
}

TEST(SimilarityThreshold, Examples) {
  EXPECT_NEAR(similarity_threshold(266000, 3856, 2490), 97.2296, 1e-4);
  EXPECT_NEAR(similarity_threshold(1, 100, 100), 99.99, 1e-9);
  EXPECT_NEAR(similarity_threshold(5000, 100, 100), 50.0, 1e-9);
}

TEST(SimilarityThreshold, StrictlyDecreasingInArea) {
  double prev = 101.0;
  for (std::int64_t area = 1; area < 10000; area += 97) {
    const double s = similarity_threshold(area, 100, 100);
    ASSERT_LT(s, prev);
    ASSERT_GT(s, 0.0);
    prev = s;
  }
}

TEST(SimilarityThreshold, RejectsBadInputs) {
  EXPECT_THROW(similarity_threshold(0, 100, 100), ConfigError);
  EXPECT_THROW(similarity_threshold(10000, 100, 100), ConfigError);
  EXPECT_THROW(similarity_threshold(10, 0, 100), ConfigError);
}

TEST(Recommend, Examples) {
  std::vector<GrayscaleStats> stats{stats_of("weevil", 30, 48), stats_of("leaf", 110, 150),
                                    stats_of("soil", 95, 125)};
  auto rec = recommend_thresholds(stats, 12);
  ASSERT_TRUE(rec.t);
  EXPECT_EQ(*rec.t, 60);
  EXPECT_EQ(rec.weevil_max, 48);
  EXPECT_DOUBLE_EQ(rec.nearest_other_mean, 95.0);

  stats[2].mean = 55;
  EXPECT_FALSE(recommend_thresholds(stats, 12).t);
  EXPECT_FALSE(recommend_thresholds(stats, 12).note.empty());
}

TEST(Recommend, RequiresBothSides) {
  std::vector<GrayscaleStats> only_weevil{stats_of("weevil", 30, 48)};
  std::vector<GrayscaleStats> no_weevil{stats_of("leaf", 110, 150)};
  EXPECT_THROW(recommend_thresholds(only_weevil, 12), ConfigError);
  EXPECT_THROW(recommend_thresholds(no_weevil, 12), ConfigError);
}

TEST(SyntheticCorpus, ClassesSeparateAtDefaultThreshold) {
  auto report = grayscale_stats(synthetic_corpus({25, 64, 48, 1}));
  ASSERT_TRUE(report.rejected.empty());
  int weevil_max = -1;
  double other_min_mean = 1e9;
  for (const auto& s : report.classes) {
    if (s.class_name == "weevil") {
      weevil_max = s.max;
    } else {
      other_min_mean = std::min(other_min_mean, s.mean);
    }
  }
  ASSERT_GE(weevil_max, 0);
  EXPECT_LT(weevil_max, 60);
  EXPECT_GT(other_min_mean, 60.0);
}

TEST(SyntheticCorpus, DeterministicForSeed) {
  auto a = synthetic_corpus({5, 16, 16, 3});
  auto b = synthetic_corpus({5, 16, 16, 3});
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].image, b[i].image);
    EXPECT_EQ(a[i].mask, b[i].mask);
  }
}

TEST(Corpus, WriteThenLoad) {
  trapsight::testing::TempDir dir;
  auto corpus = synthetic_corpus({3, 20, 10, 2});
  const auto manifest = write_corpus(corpus, dir.path());
  auto loaded = load_corpus(manifest);
  ASSERT_EQ(loaded.size(), corpus.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    EXPECT_EQ(loaded[i].class_name, corpus[i].class_name);
    EXPECT_EQ(loaded[i].image, corpus[i].image);
    EXPECT_EQ(loaded[i].mask, corpus[i].mask);
  }
  EXPECT_THROW(load_corpus(dir / "nope.jsonl"), StoreError);
}

TEST(Calibration, DerivedThresholdKeepsMaximalArrivalOnB) {
  // Small frame: the largest allowed object appearing alone must not push
  // similarity below the derived S.
  DetectionConfig cfg;
  cfg.lower = 20;
  cfg.upper = 400;
  cfg.s = similarity_threshold(cfg.upper, 100, 100);
  Detector d;
  d.process(gray_frame(100, 100, 200), cfg, {}, {});
  auto out = d.process(gray_frame(100, 100, 200, {Rect{30, 30, 20, 20}}), cfg, {}, {});
  EXPECT_EQ(out.event.algorithm, Algorithm::b);
  EXPECT_EQ(out.event.count, 1);
}
