#include "trapsight/config_registry.hpp"

#include <fstream>

namespace trapsight {

Clock system_clock() {
  return [] { return std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now()); };
}

ConfigRegistry::ConfigRegistry(DetectionConfig initial, Clock clock) : clock_(std::move(clock)) {
  initial.require_valid();
  current_ = std::make_shared<const ConfigSnapshot>(ConfigSnapshot{initial, 1, clock_()});
}

std::shared_ptr<const ConfigSnapshot> ConfigRegistry::snapshot() const { return std::atomic_load(&current_); }

std::shared_ptr<const ConfigSnapshot> ConfigRegistry::update(const DetectionConfig& next) {
  next.require_valid();
  std::lock_guard lock(write_mu_);
  const auto prev = std::atomic_load(&current_);
  auto snap = std::make_shared<const ConfigSnapshot>(ConfigSnapshot{next, prev->version + 1, clock_()});
  std::atomic_store(&current_, std::shared_ptr<const ConfigSnapshot>(snap));
  return snap;
}

std::shared_ptr<const ConfigSnapshot> ConfigRegistry::update_from_json(const nlohmann::json& patch) {
  // Holding the lock across merge and swap keeps two partial patches from
  // losing each other's fields.
  std::lock_guard lock(write_mu_);
  const auto prev = std::atomic_load(&current_);
  const DetectionConfig next = config_from_json(patch, prev->config);
  next.require_valid();
  auto snap = std::make_shared<const ConfigSnapshot>(ConfigSnapshot{next, prev->version + 1, clock_()});
  std::atomic_store(&current_, std::shared_ptr<const ConfigSnapshot>(snap));
  return snap;
}

DetectionConfig config_from_json(const nlohmann::json& j, DetectionConfig base) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object", {{"", "expected an object"}});
  std::vector<ConfigError::Field> errors;
  auto integer = [&](const char* key, auto& dst) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (v.is_number_integer()) {
      dst = v.get<std::remove_reference_t<decltype(dst)>>();
    } else if (v.is_number_float() && v.get<double>() == static_cast<double>(static_cast<std::int64_t>(v.get<double>()))) {
      dst = static_cast<std::remove_reference_t<decltype(dst)>>(v.get<double>());
    } else {
      errors.push_back({key, "must be an integer"});
    }
  };
  integer("t", base.t);
  if (j.contains("s")) {
    if (j.at("s").is_number()) {
      base.s = j.at("s").get<double>();
    } else {
      errors.push_back({"s", "must be a number"});
    }
  }
  integer("lower", base.lower);
  integer("upper", base.upper);
  integer("alert_threshold", base.alert_threshold);
  for (const auto& [key, _] : j.items()) {
    if (key != "t" && key != "s" && key != "lower" && key != "upper" && key != "alert_threshold") {
      errors.push_back({key, "unknown field"});
    }
  }
  if (!errors.empty()) throw ConfigError("invalid config document", std::move(errors));
  return base;
}

nlohmann::ordered_json full_config_json(const DetectionConfig& cfg) {
  nlohmann::ordered_json j;
  j["t"] = cfg.t;
  j["s"] = cfg.s;
  j["lower"] = cfg.lower;
  j["upper"] = cfg.upper;
  j["alert_threshold"] = cfg.alert_threshold;
  return j;
}

nlohmann::ordered_json to_json(const ConfigSnapshot& snapshot) {
  nlohmann::ordered_json j;
  j["version"] = snapshot.version;
  j["applied_at"] = format_instant(snapshot.applied_at);
  j["config"] = full_config_json(snapshot.config);
  return j;
}

DetectionConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(path.string() + ": " + ex.what());
  }
  DetectionConfig cfg = config_from_json(j);
  cfg.require_valid();
  return cfg;
}

}  // namespace trapsight
