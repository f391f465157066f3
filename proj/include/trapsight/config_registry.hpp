#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>

#include <json.hpp>

#include "trapsight/detector.hpp"
#include "trapsight/time.hpp"

namespace trapsight {

struct ConfigSnapshot {
  DetectionConfig config;
  std::uint64_t version = 1;
  Instant applied_at{};
};

using Clock = std::function<Instant()>;
Clock system_clock();

// Holds the live detector configuration. Readers get an immutable snapshot;
// updates validate first and swap the whole snapshot, bumping the version.
class ConfigRegistry {
 public:
  explicit ConfigRegistry(DetectionConfig initial = {}, Clock clock = system_clock());

  std::shared_ptr<const ConfigSnapshot> snapshot() const;

  // Throws ConfigError with field diagnostics and leaves the current
  // snapshot in place.
  std::shared_ptr<const ConfigSnapshot> update(const DetectionConfig& next);

  // Applies the keys present in `patch` over the current config. Unknown
  // keys and type mismatches are reported as field errors.
  std::shared_ptr<const ConfigSnapshot> update_from_json(const nlohmann::json& patch);

 private:
  Clock clock_;
  std::mutex write_mu_;
  std::shared_ptr<const ConfigSnapshot> current_;
};

// Merges the keys t, s, lower, upper, alert_threshold over `base`. Throws
// ConfigError listing every offending field.
DetectionConfig config_from_json(const nlohmann::json& j, DetectionConfig base = {});
nlohmann::ordered_json full_config_json(const DetectionConfig& cfg);
nlohmann::ordered_json to_json(const ConfigSnapshot& snapshot);

// Reads a config file; missing keys take the defaults.
DetectionConfig load_config(const std::filesystem::path& path);

}  // namespace trapsight
