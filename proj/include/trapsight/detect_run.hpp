#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "trapsight/detector.hpp"
#include "trapsight/monitor.hpp"

namespace trapsight {

struct DetectRunOptions {
  // A directory of .pgm/.ppm/.png frames (processed in file-name order) or
  // a scenario .json file.
  std::filesystem::path input;
  DetectionConfig config;
  std::filesystem::path out = "out";
  // Timestamps for directory input: start + i * interval. Scenario input
  // uses its own schedule.
  Instant start{};
  std::chrono::milliseconds interval{1000};
};

struct DetectRunSummary {
  std::size_t frames = 0;
  std::size_t rejected = 0;
  std::int64_t total_count = 0;
  std::size_t warnings = 0;
  std::filesystem::path event_log;
  std::vector<FrameError> errors;
};

// Runs the detector over every frame, stores frames and events under
// `out`, and rewrites out/event_log.jsonl. Identical inputs produce a
// byte-identical event log.
DetectRunSummary run_detection(const DetectRunOptions& options);

}  // namespace trapsight
