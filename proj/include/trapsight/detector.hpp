#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trapsight/errors.hpp"
#include "trapsight/image.hpp"
#include "trapsight/time.hpp"

namespace trapsight {

// Tunables of the detector. Defaults are the deployed trap's values.
struct DetectionConfig {
  int t = 60;                         // gray-level threshold
  double s = 97.0;                    // similarity threshold, percent
  std::int64_t lower = 27'785;        // smallest weevil area, pixels
  std::int64_t upper = 266'000;       // largest weevil area, pixels
  std::int64_t alert_threshold = 1;   // minimum count that raises a warning

  // Empty when every invariant holds.
  std::vector<ConfigError::Field> validate() const;
  // Throws ConfigError carrying the field diagnostics.
  void require_valid() const;

  friend bool operator==(const DetectionConfig&, const DetectionConfig&) = default;
};

enum class Algorithm {
  a,              // count everything in range in the current frame
  b,              // count only objects new since the previous frame
  a_first_frame,  // no previous frame yet; algorithm A without a comparison
};

std::string_view to_string(Algorithm algorithm);
std::optional<Algorithm> parse_algorithm(std::string_view text);

struct DetectionEvent {
  std::uint64_t seq = 0;
  Instant timestamp{};
  std::int64_t count = 0;
  Algorithm algorithm = Algorithm::a_first_frame;
  std::optional<double> similarity;  // absent for the first frame
  std::string image_ref;
  DetectionConfig config;

  friend bool operator==(const DetectionEvent&, const DetectionEvent&) = default;
};

struct Warning {
  std::uint64_t seq = 0;  // position in the warning feed; 0 until published
  std::uint64_t event_seq = 0;
  Instant timestamp{};
  std::int64_t count = 0;
  std::string message;

  friend bool operator==(const Warning&, const Warning&) = default;
};

struct DetectorState {
  std::optional<BinaryImage> previous;
  std::uint64_t frame_seq = 0;
};

// Persists the preprocessed frame and returns its reference.
using FrameSink = std::function<std::string(const GrayImage& gray, Instant captured_at)>;

// Returns B at or above the threshold; equality goes to B so that a static
// scene never recounts persistent objects.
Algorithm select_algorithm(double similarity, double s);

std::int64_t algorithm_a(const BinaryImage& current, const DetectionConfig& cfg);
// Throws DimensionError if the frames differ in shape.
std::int64_t algorithm_b(const BinaryImage& previous, const BinaryImage& current, const DetectionConfig& cfg);

std::optional<Warning> warning_for(const DetectionEvent& event);

struct FrameResult {
  DetectorState state;
  DetectionEvent event;
  std::optional<Warning> warning;
};

// One pass of the processing flow: grayscale, threshold, compare with the
// previous frame, count, store. `now` is injected so that identical inputs
// produce identical events. The config is validated first.
FrameResult process_frame(DetectorState state, const ColorImage& frame, const DetectionConfig& cfg, Instant now,
                          const FrameSink& sink);

// Owns DetectorState for a single processing loop. process() leaves the
// state untouched when it throws.
class Detector {
 public:
  struct Output {
    DetectionEvent event;
    std::optional<Warning> warning;
  };

  Output process(const ColorImage& frame, const DetectionConfig& cfg, Instant now, const FrameSink& sink);

  const DetectorState& state() const noexcept { return state_; }
  std::uint64_t frames_processed() const noexcept { return state_.frame_seq; }

 private:
  DetectorState state_;
};

}  // namespace trapsight
