#include <gtest/gtest.h>

#include <stdexcept>

#include "support/scenes.hpp"
#include "trapsight/detector.hpp"
#include "trapsight/errors.hpp"
#include "trapsight/imaging.hpp"

using namespace trapsight;
using trapsight::testing::binary_with_rects;
using trapsight::testing::gray_frame;
using trapsight::testing::random_binary;
using trapsight::testing::Rect;

namespace {

// Scaled-down bounds so that 100 x 100 frames exercise the same logic.
DetectionConfig small_config() {
  DetectionConfig cfg;
  cfg.lower = 20;
  cfg.upper = 500;
  return cfg;
}

const Instant kT0 = Instant{} + std::chrono::hours(24 * 365 * 54);

FrameSink counting_sink(int& calls) {
  return [&calls](const GrayImage&, Instant) { return "img-" + std::to_string(++calls); };
}

}  // namespace

TEST(SelectAlgorithm, ThresholdCases) {
  EXPECT_EQ(select_algorithm(96.0, 97.0), Algorithm::a);
  EXPECT_EQ(select_algorithm(97.0, 97.0), Algorithm::b);
  EXPECT_EQ(select_algorithm(98.0, 97.0), Algorithm::b);
  EXPECT_EQ(select_algorithm(0.0, 0.0), Algorithm::b);
  EXPECT_EQ(select_algorithm(99.99, 100.0), Algorithm::a);
}

TEST(SelectAlgorithm, MonotoneInSimilarity) {
  for (double s = 0.0; s <= 100.0; s += 2.5) {
    bool seen_b = false;
    for (double sim = 0.0; sim <= 100.0; sim += 0.25) {
      const bool b = select_algorithm(sim, s) == Algorithm::b;
      if (seen_b) ASSERT_TRUE(b) << "sim " << sim << " s " << s;
      seen_b = seen_b || b;
    }
  }
}

TEST(AlgorithmNames, RoundTrip) {
  for (auto a : {Algorithm::a, Algorithm::b, Algorithm::a_first_frame}) EXPECT_EQ(parse_algorithm(to_string(a)), a);
  EXPECT_EQ(to_string(Algorithm::a_first_frame), "A-first-frame");
  EXPECT_FALSE(parse_algorithm("C"));
}

TEST(AlgorithmA, CountsInRangeComponents) {
  // 25 px and 400 px are in range; a 9 px speck and a 600 px blob are not.
  auto img = binary_with_rects(100, 100, {Rect{1, 1, 5, 5}, Rect{10, 10, 20, 20}, Rect{50, 50, 3, 3},
                                          Rect{60, 60, 30, 20}});
  EXPECT_EQ(algorithm_a(img, small_config()), 2);
  EXPECT_EQ(algorithm_a(BinaryImage(100, 100), small_config()), 0);
}

TEST(AlgorithmB, CountsOnlyArrivals) {
  auto prev = binary_with_rects(100, 100, {Rect{1, 1, 5, 5}});
  auto cur = binary_with_rects(100, 100, {Rect{1, 1, 5, 5}, Rect{40, 40, 10, 10}});
  EXPECT_EQ(algorithm_b(prev, cur, small_config()), 1);
  EXPECT_EQ(algorithm_a(cur, small_config()), 2);
}

TEST(AlgorithmB, StaticSceneCountsZero) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto img = random_binary(60, 60, 0.5, seed);
    ASSERT_EQ(algorithm_b(img, img, small_config()), 0);
  }
}

TEST(AlgorithmB, EmptyPreviousEqualsA) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto img = random_binary(60, 60, 0.1 + 0.01 * static_cast<double>(seed), seed);
    ASSERT_EQ(algorithm_b(BinaryImage(60, 60), img, small_config()), algorithm_a(img, small_config()));
  }
}

TEST(AlgorithmB, ShapeMismatchThrows) {
  EXPECT_THROW(algorithm_b(BinaryImage(5, 5), BinaryImage(6, 5), small_config()), DimensionError);
}

TEST(ProcessFrame, FirstFrameThenStaticThenLargeChange) {
  const auto cfg = small_config();
  int sink_calls = 0;
  auto sink = counting_sink(sink_calls);

  const auto f1 = gray_frame(100, 100, 200, {Rect{10, 10, 10, 10, 30}});
  auto r1 = process_frame({}, f1, cfg, kT0, sink);
  EXPECT_EQ(r1.event.seq, 1u);
  EXPECT_EQ(r1.event.algorithm, Algorithm::a_first_frame);
  EXPECT_FALSE(r1.event.similarity);
  EXPECT_EQ(r1.event.count, 1);
  EXPECT_EQ(r1.event.image_ref, "img-1");
  EXPECT_EQ(r1.event.timestamp, kT0);
  EXPECT_EQ(r1.event.config, cfg);
  EXPECT_TRUE(r1.warning);

  auto r2 = process_frame(r1.state, f1, cfg, kT0 + std::chrono::seconds(1), sink);
  EXPECT_EQ(r2.event.seq, 2u);
  EXPECT_EQ(r2.event.algorithm, Algorithm::b);
  ASSERT_TRUE(r2.event.similarity);
  EXPECT_DOUBLE_EQ(*r2.event.similarity, 100.0);
  EXPECT_EQ(r2.event.count, 0);
  EXPECT_FALSE(r2.warning);

  // Half the frame turns dark: similarity 50%, so every object is recounted.
  const auto f3 = gray_frame(100, 100, 200, {Rect{10, 10, 10, 10, 30}, Rect{0, 50, 100, 50, 20}});
  auto r3 = process_frame(r2.state, f3, cfg, kT0 + std::chrono::seconds(2), sink);
  EXPECT_EQ(r3.event.algorithm, Algorithm::a);
  EXPECT_NEAR(*r3.event.similarity, 50.0, 1e-9);
  EXPECT_EQ(r3.event.count, 1);  // the dark half exceeds the upper bound
  EXPECT_EQ(sink_calls, 3);
}

TEST(ProcessFrame, SmallArrivalUsesB) {
  const auto cfg = small_config();
  const auto f1 = gray_frame(100, 100, 200, {Rect{10, 10, 10, 10}});
  const auto f2 = gray_frame(100, 100, 200, {Rect{10, 10, 10, 10}, Rect{50, 50, 5, 5}});
  auto r1 = process_frame({}, f1, cfg, kT0, {});
  auto r2 = process_frame(r1.state, f2, cfg, kT0, {});
  EXPECT_EQ(r2.event.algorithm, Algorithm::b);
  EXPECT_NEAR(*r2.event.similarity, 99.75, 1e-9);
  EXPECT_EQ(r2.event.count, 1);
}

TEST(ProcessFrame, ShapeChangeRestartsComparison) {
  const auto cfg = small_config();
  auto r1 = process_frame({}, gray_frame(100, 100, 200), cfg, kT0, {});
  auto r2 = process_frame(r1.state, gray_frame(80, 100, 200), cfg, kT0, {});
  EXPECT_EQ(r2.event.algorithm, Algorithm::a_first_frame);
  EXPECT_FALSE(r2.event.similarity);
}

TEST(ProcessFrame, SinkSeesThePreprocessedFrame) {
  const auto f = gray_frame(4, 4, 90);
  GrayImage seen(1, 1);
  process_frame({}, f, small_config(), kT0, [&](const GrayImage& g, Instant) {
    seen = g;
    return std::string("x");
  });
  EXPECT_EQ(seen, to_grayscale(f));
}

TEST(Warnings, RaisedIffCountReachesThreshold) {
  DetectionEvent e;
  e.seq = 4;
  e.config.alert_threshold = 2;
  for (std::int64_t count = 0; count < 5; ++count) {
    e.count = count;
    auto w = warning_for(e);
    EXPECT_EQ(w.has_value(), count >= 2) << count;
    if (w) {
      EXPECT_EQ(w->event_seq, 4u);
      EXPECT_EQ(w->count, count);
      EXPECT_FALSE(w->message.empty());
    }
  }
}

TEST(Config, DefaultsAreValid) {
  DetectionConfig cfg;
  EXPECT_TRUE(cfg.validate().empty());
  EXPECT_EQ(cfg.t, 60);
  EXPECT_DOUBLE_EQ(cfg.s, 97.0);
  EXPECT_EQ(cfg.lower, 27785);
  EXPECT_EQ(cfg.upper, 266000);
  EXPECT_EQ(cfg.alert_threshold, 1);
}

TEST(Config, InvalidFieldsReported) {
  DetectionConfig cfg;
  cfg.t = 256;
  cfg.s = 101;
  cfg.lower = 10;
  cfg.upper = 5;
  cfg.alert_threshold = 0;
  auto errors = cfg.validate();
  std::vector<std::string> fields;
  for (const auto& e : errors) fields.push_back(e.field);
  EXPECT_EQ(fields, (std::vector<std::string>{"t", "s", "lower", "alert_threshold"}));
  try {
    cfg.require_valid();
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.fields().size(), errors.size());
  }
}

TEST(DetectorObject, StateUntouchedOnFailure) {
  Detector d;
  const auto f = gray_frame(50, 50, 200, {Rect{5, 5, 5, 5}});
  d.process(f, small_config(), kT0, {});
  ASSERT_EQ(d.frames_processed(), 1u);
  const auto before = d.state().previous;

  DetectionConfig bad = small_config();
  bad.lower = 1000;
  EXPECT_THROW(d.process(f, bad, kT0, {}), ConfigError);
  EXPECT_THROW(d.process(gray_frame(50, 50, 0), small_config(), kT0,
                         [](const GrayImage&, Instant) -> std::string { throw std::runtime_error("disk full"); }),
               std::runtime_error);
  EXPECT_EQ(d.frames_processed(), 1u);
  EXPECT_EQ(d.state().previous, before);
}

TEST(DetectorObject, DeterministicForIdenticalInputs) {
  std::vector<ColorImage> frames;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    auto bin = random_binary(40, 40, 0.02 + 0.1 * static_cast<double>(seed % 3), seed);
    ColorImage img(40, 40, Rgb{200, 200, 200});
    for (int y = 0; y < 40; ++y)
      for (int x = 0; x < 40; ++x)
        if (bin.foreground(x, y)) img.at(x, y) = Rgb{20, 20, 20};
    frames.push_back(img);
  }
  Detector a, b;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto now = kT0 + std::chrono::seconds(static_cast<int>(i));
    auto ea = a.process(frames[i], small_config(), now, {});
    auto eb = b.process(frames[i], small_config(), now, {});
    ASSERT_EQ(ea.event, eb.event);
  }
}
