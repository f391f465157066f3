#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <tuple>

#include "support/flood_fill_oracle.hpp"
#include "support/scenes.hpp"
#include "trapsight/errors.hpp"
#include "trapsight/imaging.hpp"

using namespace trapsight;
using trapsight::testing::binary_with_rects;
using trapsight::testing::random_binary;
using trapsight::testing::Rect;

namespace {

ColorImage single_pixel(Rgb p) { return ColorImage(1, 1, p); }

std::vector<Component> with_areas(std::initializer_list<std::int64_t> areas) {
  std::vector<Component> out;
  int label = 1;
  for (auto a : areas) {
    Component c;
    c.label = label++;
    c.area = a;
    out.push_back(c);
  }
  return out;
}

}  // namespace

TEST(Grayscale, KnownColours) {
  EXPECT_EQ(to_grayscale(single_pixel({0, 0, 0})).at(0, 0), 0);
  EXPECT_EQ(to_grayscale(single_pixel({255, 255, 255})).at(0, 0), 255);
  EXPECT_EQ(to_grayscale(single_pixel({255, 0, 0})).at(0, 0), 76);   // 76.245
  EXPECT_EQ(to_grayscale(single_pixel({0, 255, 0})).at(0, 0), 150);  // 149.685
  EXPECT_EQ(to_grayscale(single_pixel({0, 0, 255})).at(0, 0), 29);   // 29.07
}

TEST(Grayscale, HalfRoundsUp) {
  // 114 * 250 / 1000 = 28.5
  EXPECT_EQ(to_grayscale(single_pixel({0, 0, 250})).at(0, 0), 29);
}

TEST(Grayscale, NeutralPixelsKeepTheirLevel) {
  for (int v = 0; v < 256; ++v) {
    const auto u = static_cast<std::uint8_t>(v);
    ASSERT_EQ(to_grayscale(single_pixel({u, u, u})).at(0, 0), v);
  }
}

TEST(Grayscale, MonotoneInEachChannel) {
  std::mt19937 rng(5);
  for (int i = 0; i < 2000; ++i) {
    Rgb p{static_cast<std::uint8_t>(rng() % 255), static_cast<std::uint8_t>(rng() % 255),
          static_cast<std::uint8_t>(rng() % 255)};
    const auto base = to_grayscale(single_pixel(p)).at(0, 0);
    for (int ch = 0; ch < 3; ++ch) {
      Rgb q = p;
      (ch == 0 ? q.r : ch == 1 ? q.g : q.b) += 1;
      ASSERT_GE(to_grayscale(single_pixel(q)).at(0, 0), base);
    }
  }
}

TEST(Grayscale, PreservesShape) {
  ColorImage img(7, 3, Rgb{10, 20, 30});
  auto g = to_grayscale(img);
  EXPECT_EQ(g.width(), 7);
  EXPECT_EQ(g.height(), 3);
}

TEST(Threshold, Examples) {
  GrayImage img(4, 1, std::vector<std::uint8_t>{0, 60, 61, 255});
  auto b = binary_threshold(img, 60);
  EXPECT_EQ(b.at(0, 0), kForeground);
  EXPECT_EQ(b.at(1, 0), kForeground);  // equality is foreground
  EXPECT_EQ(b.at(2, 0), kBackground);
  EXPECT_EQ(b.at(3, 0), kBackground);
}

TEST(Threshold, ExhaustiveAgainstDefinition) {
  std::vector<std::uint8_t> levels(256);
  for (int g = 0; g < 256; ++g) levels[g] = static_cast<std::uint8_t>(g);
  GrayImage ramp(256, 1, levels);
  for (int t = 0; t < 256; ++t) {
    auto b = binary_threshold(ramp, static_cast<std::uint8_t>(t));
    for (int g = 0; g < 256; ++g) ASSERT_EQ(b.at(g, 0), g > t ? 0 : 255) << "g=" << g << " t=" << t;
  }
}

TEST(Threshold, OutputIsBinaryAndMonotoneInT) {
  std::mt19937 rng(9);
  std::vector<std::uint8_t> px(50 * 40);
  for (auto& p : px) p = static_cast<std::uint8_t>(rng());
  GrayImage img(50, 40, px);
  std::size_t prev = 0;
  for (int t = 0; t < 256; t += 5) {
    auto b = binary_threshold(img, static_cast<std::uint8_t>(t));
    for (auto v : b.pixels()) ASSERT_TRUE(v == 0 || v == 255);
    ASSERT_GE(b.foreground_count(), prev);
    prev = b.foreground_count();
  }
}

TEST(Difference, ExamplesAndSymmetry) {
  GrayImage a(3, 1, std::vector<std::uint8_t>{0, 100, 255});
  GrayImage b(3, 1, std::vector<std::uint8_t>{255, 40, 255});
  auto d = absolute_difference(a, b);
  EXPECT_EQ(d.at(0, 0), 255);
  EXPECT_EQ(d.at(1, 0), 60);
  EXPECT_EQ(d.at(2, 0), 0);
  EXPECT_EQ(absolute_difference(b, a), d);
  EXPECT_EQ(absolute_difference(a, a), GrayImage(3, 1, std::uint8_t{0}));
}

TEST(Difference, ShapeMismatchThrows) {
  EXPECT_THROW(absolute_difference(GrayImage(3, 2), GrayImage(2, 3)), DimensionError);
}

TEST(Similarity, IdenticalIsHundred) {
  auto a = random_binary(31, 17, 0.4, 1);
  EXPECT_DOUBLE_EQ(similarity_percent(a, a), 100.0);
}

TEST(Similarity, FlippingKPixels) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    auto a = random_binary(40, 25, 0.3, trial);
    auto b = a;
    std::vector<int> idx(a.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    std::shuffle(idx.begin(), idx.end(), rng);
    const int k = static_cast<int>(rng() % a.size());
    for (int i = 0; i < k; ++i) {
      const int x = idx[i] % 40, y = idx[i] / 40;
      b.set(x, y, !b.foreground(x, y));
    }
    const double expected = 100.0 * static_cast<double>(a.size() - k) / static_cast<double>(a.size());
    ASSERT_NEAR(similarity_percent(a, b), expected, 1e-9);
    ASSERT_DOUBLE_EQ(similarity_percent(a, b), similarity_percent(b, a));
  }
}

TEST(Similarity, FullResolutionMaximalWeevil) {
  BinaryImage a(3856, 2490);
  BinaryImage b(3856, 2490);
  // 266,000 changed pixels: 1000 full rows of 266 columns.
  for (int y = 0; y < 1000; ++y)
    for (int x = 0; x < 266; ++x) b.set(x, y, true);
  EXPECT_NEAR(similarity_percent(a, b), 97.2296, 1e-4);
}

TEST(Similarity, ShapeMismatchThrows) {
  EXPECT_THROW(similarity_percent(BinaryImage(4, 4), BinaryImage(4, 5)), DimensionError);
}

TEST(Labeling, EmptyImageHasNoComponents) { EXPECT_TRUE(label_components(BinaryImage(10, 10)).empty()); }

TEST(Labeling, DiagonalNeighboursJoin) {
  BinaryImage img(3, 3);
  img.set(0, 0, true);
  img.set(1, 1, true);
  img.set(2, 2, true);
  auto cs = label_components(img);
  ASSERT_EQ(cs.size(), 1u);
  EXPECT_EQ(cs[0].area, 3);
  EXPECT_EQ(cs[0].bbox, (Component::Box{0, 0, 2, 2}));
}

TEST(Labeling, AntiDiagonalJoins) {
  BinaryImage img(2, 2);
  img.set(1, 0, true);
  img.set(0, 1, true);
  EXPECT_EQ(label_components(img).size(), 1u);
}

TEST(Labeling, GapSeparates) {
  BinaryImage img(3, 1);
  img.set(0, 0, true);
  img.set(2, 0, true);
  auto cs = label_components(img);
  ASSERT_EQ(cs.size(), 2u);
  EXPECT_EQ(cs[0].bbox.min_x, 0);
  EXPECT_EQ(cs[1].bbox.min_x, 2);
}

TEST(Labeling, UShapeMergesLate) {
  // Two arms that only meet in the bottom row.
  auto img = binary_with_rects(7, 5, {Rect{0, 0, 2, 5}, Rect{5, 0, 2, 5}, Rect{0, 4, 7, 1}});
  auto cs = label_components(img);
  ASSERT_EQ(cs.size(), 1u);
  EXPECT_EQ(cs[0].area, 10 + 10 + 3);
}

TEST(Labeling, RectangleGeometry) {
  auto img = binary_with_rects(20, 20, {Rect{3, 4, 5, 6}});
  auto cs = label_components(img);
  ASSERT_EQ(cs.size(), 1u);
  EXPECT_EQ(cs[0].label, 1);
  EXPECT_EQ(cs[0].area, 30);
  EXPECT_EQ(cs[0].bbox, (Component::Box{3, 4, 7, 9}));
  EXPECT_DOUBLE_EQ(cs[0].centroid_x, 5.0);
  EXPECT_DOUBLE_EQ(cs[0].centroid_y, 6.5);
}

TEST(Labeling, OrderedByTopThenLeft) {
  auto img = binary_with_rects(30, 30, {Rect{20, 2, 3, 3}, Rect{2, 10, 3, 3}, Rect{10, 2, 3, 3}});
  auto cs = label_components(img);
  ASSERT_EQ(cs.size(), 3u);
  EXPECT_EQ(cs[0].bbox.min_x, 10);
  EXPECT_EQ(cs[1].bbox.min_x, 20);
  EXPECT_EQ(cs[2].bbox.min_y, 10);
}

TEST(Labeling, MatchesFloodFillOracle) {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const double density = 0.05 + 0.65 * static_cast<double>(seed % 14) / 13.0;
    auto img = random_binary(64, 64, density, seed);
    std::vector<std::uint8_t> grid(img.pixels().begin(), img.pixels().end());
    auto expected = trapsight::testing::flood_fill_regions(grid, 64, 64);
    std::sort(expected.begin(), expected.end(), [](const auto& a, const auto& b) {
      return std::tie(a.min_y, a.min_x, a.first_x) < std::tie(b.min_y, b.min_x, b.first_x);
    });
    auto got = label_components(img);
    ASSERT_EQ(got.size(), expected.size()) << "seed " << seed;
    for (std::size_t i = 0; i < got.size(); ++i) {
      ASSERT_EQ(got[i].label, static_cast<int>(i) + 1);
      ASSERT_EQ(got[i].area, expected[i].area) << "seed " << seed << " component " << i;
      ASSERT_EQ(got[i].bbox, (Component::Box{expected[i].min_x, expected[i].min_y, expected[i].max_x,
                                             expected[i].max_y}))
          << "seed " << seed;
    }
  }
}

TEST(Labeling, AreasSumToForeground) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto img = random_binary(80, 50, 0.45, seed + 5000);
    auto cs = label_components(img);
    std::int64_t total = 0;
    for (const auto& c : cs) {
      total += c.area;
      ASSERT_GE(c.centroid_x, c.bbox.min_x);
      ASSERT_LE(c.centroid_x, c.bbox.max_x);
      ASSERT_GE(c.centroid_y, c.bbox.min_y);
      ASSERT_LE(c.centroid_y, c.bbox.max_y);
      ASSERT_LE(c.area, static_cast<std::int64_t>(c.bbox.width()) * c.bbox.height());
    }
    ASSERT_EQ(total, static_cast<std::int64_t>(img.foreground_count()));
  }
}

TEST(CountWeevils, BoundsInclusive) {
  auto cs = with_areas({27784, 27785, 100000, 266000, 266001});
  EXPECT_EQ(count_weevils(cs, 27785, 266000), 3u);
}

TEST(CountWeevils, DegenerateRange) {
  auto cs = with_areas({5, 6, 7});
  EXPECT_EQ(count_weevils(cs, 6, 6), 1u);
  EXPECT_THROW(count_weevils(cs, 7, 6), ConfigError);
}

TEST(CountWeevils, WideningNeverDecreases) {
  std::mt19937_64 rng(11);
  std::vector<Component> cs;
  for (int i = 0; i < 200; ++i) {
    Component c;
    c.area = static_cast<std::int64_t>(rng() % 1000) + 1;
    cs.push_back(c);
  }
  for (int i = 0; i < 200; ++i) {
    const std::int64_t lo = static_cast<std::int64_t>(rng() % 500);
    const std::int64_t hi = lo + static_cast<std::int64_t>(rng() % 500);
    const auto n = count_weevils(cs, lo, hi);
    ASSERT_LE(n, cs.size());
    ASSERT_GE(count_weevils(cs, lo > 0 ? lo - 1 : 0, hi + 1), n);
  }
}

TEST(NewObjectMask, KeepsOnlyArrivals) {
  auto prev = binary_with_rects(10, 10, {Rect{0, 0, 3, 3}});
  auto cur = binary_with_rects(10, 10, {Rect{0, 0, 3, 3}, Rect{6, 6, 2, 2}});
  auto mask = new_object_mask(prev, cur);
  EXPECT_EQ(mask.foreground_count(), 4u);
  EXPECT_TRUE(mask.foreground(6, 6));
  EXPECT_FALSE(mask.foreground(0, 0));
  EXPECT_EQ(new_object_mask(cur, cur).foreground_count(), 0u);
  EXPECT_THROW(new_object_mask(BinaryImage(2, 2), BinaryImage(3, 2)), DimensionError);
}

TEST(BinaryImage, RejectsNonBinaryPixels) {
  EXPECT_THROW(BinaryImage(2, 1, std::vector<std::uint8_t>{0, 7}), std::invalid_argument);
  EXPECT_THROW(BinaryImage(0, 1), DimensionError);
  EXPECT_THROW(GrayImage(2, 2, std::vector<std::uint8_t>{1, 2, 3}), DimensionError);
}
