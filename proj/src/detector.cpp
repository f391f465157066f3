#include "trapsight/detector.hpp"

#include <fmt/format.h>

#include "trapsight/imaging.hpp"

namespace trapsight {
namespace {

struct Evaluation {
  BinaryImage current;
  DetectionEvent event;
};

Evaluation evaluate(const DetectorState& state, const ColorImage& frame, const DetectionConfig& cfg, Instant now,
                    const FrameSink& sink) {
  cfg.require_valid();
  const GrayImage gray = to_grayscale(frame);
  BinaryImage current = binary_threshold(gray, static_cast<std::uint8_t>(cfg.t));

  DetectionEvent event;
  event.seq = state.frame_seq + 1;
  event.timestamp = now;
  event.config = cfg;
  if (!state.previous || !state.previous->same_shape(current)) {
    // A resolution change is treated like a restart: nothing to compare to.
    event.algorithm = Algorithm::a_first_frame;
    event.count = algorithm_a(current, cfg);
  } else {
    const double sim = similarity_percent(*state.previous, current);
    event.similarity = sim;
    event.algorithm = select_algorithm(sim, cfg.s);
    event.count = event.algorithm == Algorithm::b ? algorithm_b(*state.previous, current, cfg)
                                                  : algorithm_a(current, cfg);
  }
  event.image_ref = sink ? sink(gray, now) : std::string{};
  return {std::move(current), std::move(event)};
}

}  // namespace

std::vector<ConfigError::Field> DetectionConfig::validate() const {
  std::vector<ConfigError::Field> errors;
  if (t < 0 || t > 255) errors.push_back({"t", "must be within [0, 255]"});
  if (!(s >= 0.0 && s <= 100.0)) errors.push_back({"s", "must be within [0, 100]"});
  if (lower < 1) errors.push_back({"lower", "must be at least 1"});
  if (upper < 1) errors.push_back({"upper", "must be at least 1"});
  if (lower > upper) errors.push_back({"lower", "must not exceed upper"});
  if (alert_threshold < 1) errors.push_back({"alert_threshold", "must be at least 1"});
  return errors;
}

void DetectionConfig::require_valid() const {
  auto errors = validate();
  if (errors.empty()) return;
  std::string what = "invalid detection config:";
  for (const auto& e : errors) what += " " + e.field + " " + e.message + ";";
  throw ConfigError(what, std::move(errors));
}

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::a: return "A";
    case Algorithm::b: return "B";
    case Algorithm::a_first_frame: return "A-first-frame";
  }
  return "?";
}

std::optional<Algorithm> parse_algorithm(std::string_view text) {
  if (text == "A") return Algorithm::a;
  if (text == "B") return Algorithm::b;
  if (text == "A-first-frame") return Algorithm::a_first_frame;
  return std::nullopt;
}

Algorithm select_algorithm(double similarity, double s) { return similarity < s ? Algorithm::a : Algorithm::b; }

std::int64_t algorithm_a(const BinaryImage& current, const DetectionConfig& cfg) {
  const auto components = label_components(current);
  return static_cast<std::int64_t>(count_weevils(components, cfg.lower, cfg.upper));
}

std::int64_t algorithm_b(const BinaryImage& previous, const BinaryImage& current, const DetectionConfig& cfg) {
  // Departed objects show up in |current - previous| but are background now,
  // so intersecting with current foreground keeps arrivals only.
  const auto components = label_components(new_object_mask(previous, current));
  return static_cast<std::int64_t>(count_weevils(components, cfg.lower, cfg.upper));
}

std::optional<Warning> warning_for(const DetectionEvent& event) {
  if (event.count < event.config.alert_threshold) return std::nullopt;
  Warning w;
  w.event_seq = event.seq;
  w.timestamp = event.timestamp;
  w.count = event.count;
  w.message = fmt::format("{} weevil{} detected in frame {}", event.count, event.count == 1 ? "" : "s", event.seq);
  return w;
}

FrameResult process_frame(DetectorState state, const ColorImage& frame, const DetectionConfig& cfg, Instant now,
                          const FrameSink& sink) {
  auto [current, event] = evaluate(state, frame, cfg, now, sink);
  state.previous = std::move(current);
  state.frame_seq = event.seq;
  auto warning = warning_for(event);
  return {std::move(state), std::move(event), std::move(warning)};
}

Detector::Output Detector::process(const ColorImage& frame, const DetectionConfig& cfg, Instant now,
                                   const FrameSink& sink) {
  auto [current, event] = evaluate(state_, frame, cfg, now, sink);
  state_.previous = std::move(current);
  state_.frame_seq = event.seq;
  auto warning = warning_for(event);
  return {std::move(event), std::move(warning)};
}

}  // namespace trapsight
