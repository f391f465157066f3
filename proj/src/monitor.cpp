#include "trapsight/monitor.hpp"

#include "trapsight/image_io.hpp"

namespace trapsight {

Monitor::Monitor(Store& store, ConfigRegistry& config, WarningFeed& warnings, Clock clock,
                 std::size_t channel_capacity)
    : store_(store),
      config_(config),
      warnings_(warnings),
      clock_(std::move(clock)),
      started_at_(clock_()),
      channel_(channel_capacity) {}

void Monitor::set_scenario(std::optional<sim::TrapScenario> scenario) {
  if (scenario) scenario->require_valid();
  std::lock_guard lock(state_mu_);
  scenario_ = std::move(scenario);
  next_frame_ = 0;
}

ProcessOutcome Monitor::process(const ColorImage& frame, Instant now) {
  std::lock_guard lock(process_mu_);
  return process_locked(frame, now);
}

ProcessOutcome Monitor::process_locked(const ColorImage& frame, Instant now) {
  const auto snapshot = config_.snapshot();
  auto out = detector_.process(frame, snapshot->config, now, store_sink(store_));
  ProcessOutcome result{store_.append_event(out.event), std::nullopt};
  if (out.warning) result.warning = warnings_.publish(*out.warning);
  {
    std::lock_guard lock(state_mu_);
    last_event_ = out.event;
  }
  ++processed_;
  channel_.publish(std::move(out.event));
  return result;
}

std::optional<ProcessOutcome> Monitor::process_encoded(std::span<const std::uint8_t> bytes, Instant now,
                                                       const std::string& source) {
  std::optional<ColorImage> frame;
  try {
    frame = decode_color(bytes);
  } catch (const DecodeError& ex) {
    std::lock_guard lock(state_mu_);
    errors_.push_back({source, now, ex.what()});
    ++rejected_;
    return std::nullopt;
  }
  return process(*frame, now);
}

ProcessOutcome Monitor::capture() {
  std::lock_guard lock(process_mu_);
  std::optional<ColorImage> frame;
  {
    std::lock_guard state(state_mu_);
    if (!scenario_) throw CaptureUnavailable("no capture source configured");
    if (next_frame_ >= scenario_->frames.size()) throw CaptureUnavailable("capture scenario exhausted");
    frame = sim::render_frame(*scenario_, next_frame_);
    ++next_frame_;
  }
  return process_locked(*frame, clock_());
}

MonitorStatus Monitor::status() const {
  MonitorStatus s;
  s.started_at = started_at_;
  s.frames_processed = processed_.load();
  s.frames_rejected = rejected_.load();
  s.events_dropped = channel_.dropped();
  s.config = config_.snapshot();
  std::lock_guard lock(state_mu_);
  s.last_event = last_event_;
  if (scenario_ && next_frame_ < scenario_->frames.size()) s.next_capture_frame = next_frame_;
  return s;
}

std::vector<FrameError> Monitor::frame_errors() const {
  std::lock_guard lock(state_mu_);
  return errors_;
}

}  // namespace trapsight
