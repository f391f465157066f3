#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trapsight/channel.hpp"
#include "trapsight/config_registry.hpp"
#include "trapsight/detector.hpp"
#include "trapsight/simulator.hpp"
#include "trapsight/store.hpp"
#include "trapsight/warning_feed.hpp"

namespace trapsight {

struct FrameError {
  std::string source;
  Instant at{};
  std::string reason;
};

struct MonitorStatus {
  Instant started_at{};
  std::uint64_t frames_processed = 0;
  std::uint64_t frames_rejected = 0;
  std::uint64_t events_dropped = 0;
  std::shared_ptr<const ConfigSnapshot> config;
  std::optional<DetectionEvent> last_event;
  std::optional<std::size_t> next_capture_frame;  // absent when nothing is left to capture
};

struct ProcessOutcome {
  EventRecord record;
  std::optional<Warning> warning;
};

// Thrown by capture() when there is no scenario or it is exhausted.
class CaptureUnavailable : public Error {
 public:
  using Error::Error;
};

// The trap's processing loop: one frame at a time, config read once per
// frame, frame stored, event appended, warning published. Events are also
// pushed to a bounded channel for live consumers.
class Monitor {
 public:
  Monitor(Store& store, ConfigRegistry& config, WarningFeed& warnings, Clock clock = system_clock(),
          std::size_t channel_capacity = 256);

  // Scripted frame source for manual capture.
  void set_scenario(std::optional<sim::TrapScenario> scenario);

  ProcessOutcome process(const ColorImage& frame, Instant now);
  // Undecodable bytes are rejected: the detector state is left alone and
  // the failure is recorded in frame_errors().
  std::optional<ProcessOutcome> process_encoded(std::span<const std::uint8_t> bytes, Instant now,
                                                const std::string& source);
  // Processes the next scenario frame, stamped with the clock.
  ProcessOutcome capture();

  MonitorStatus status() const;
  std::vector<FrameError> frame_errors() const;
  BoundedChannel<DetectionEvent>& events() noexcept { return channel_; }

 private:
  Store& store_;
  ConfigRegistry& config_;
  WarningFeed& warnings_;
  Clock clock_;
  Instant started_at_;

  ProcessOutcome process_locked(const ColorImage& frame, Instant now);

  std::mutex process_mu_;  // one frame at a time
  Detector detector_;
  mutable std::mutex state_mu_;  // guards the fields below; never held while processing
  std::optional<sim::TrapScenario> scenario_;
  std::size_t next_frame_ = 0;
  std::optional<DetectionEvent> last_event_;
  std::vector<FrameError> errors_;
  std::atomic<std::uint64_t> processed_{0};
  std::atomic<std::uint64_t> rejected_{0};
  BoundedChannel<DetectionEvent> channel_;
};

}  // namespace trapsight
