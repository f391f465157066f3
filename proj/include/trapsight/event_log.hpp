#pragma once

// JSON Lines encoding of detection events. One object per line with the
// keys seq, ts, count, algorithm, similarity, image_ref, config in that
// order; the store appends storage_seq. Output is byte-stable.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "trapsight/detector.hpp"

namespace trapsight {

struct EventRecord {
  DetectionEvent event;
  std::uint64_t storage_seq = 0;

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

nlohmann::ordered_json to_json(const DetectionEvent& event);
nlohmann::ordered_json to_json(const EventRecord& record);
nlohmann::ordered_json to_json(const Warning& warning);
nlohmann::ordered_json to_json(const DetectionConfig& cfg);

// Lines carry no trailing newline.
std::string event_line(const DetectionEvent& event);
std::string record_line(const EventRecord& record);

// Throw StoreError on malformed input.
DetectionEvent event_from_json(const nlohmann::json& j);
EventRecord record_from_json(const nlohmann::json& j);
Warning warning_from_json(const nlohmann::json& j);

// Appends event lines to a file, flushing after each one.
class EventLogWriter {
 public:
  explicit EventLogWriter(const std::filesystem::path& path);
  void write(const DetectionEvent& event);

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

}  // namespace trapsight
