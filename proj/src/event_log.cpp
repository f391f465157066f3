#include "trapsight/event_log.hpp"

#include "trapsight/errors.hpp"

namespace trapsight {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json to_json(const DetectionConfig& cfg) {
  ordered_json j;
  j["t"] = cfg.t;
  j["s"] = cfg.s;
  j["lower"] = cfg.lower;
  j["upper"] = cfg.upper;
  return j;
}

ordered_json to_json(const DetectionEvent& event) {
  ordered_json j;
  j["seq"] = event.seq;
  j["ts"] = format_instant(event.timestamp);
  j["count"] = event.count;
  j["algorithm"] = std::string(to_string(event.algorithm));
  j["similarity"] = event.similarity ? ordered_json(*event.similarity) : ordered_json(nullptr);
  j["image_ref"] = event.image_ref;
  j["config"] = to_json(event.config);
  return j;
}

ordered_json to_json(const EventRecord& record) {
  ordered_json j = to_json(record.event);
  j["storage_seq"] = record.storage_seq;
  return j;
}

ordered_json to_json(const Warning& warning) {
  ordered_json j;
  j["seq"] = warning.seq;
  j["event_seq"] = warning.event_seq;
  j["ts"] = format_instant(warning.timestamp);
  j["count"] = warning.count;
  j["message"] = warning.message;
  return j;
}

std::string event_line(const DetectionEvent& event) { return to_json(event).dump(); }
std::string record_line(const EventRecord& record) { return to_json(record).dump(); }

DetectionEvent event_from_json(const json& j) {
  try {
    DetectionEvent e;
    e.seq = j.at("seq").get<std::uint64_t>();
    const auto ts = parse_instant(j.at("ts").get<std::string>());
    if (!ts) throw StoreError("bad timestamp");
    e.timestamp = *ts;
    e.count = j.at("count").get<std::int64_t>();
    const auto alg = parse_algorithm(j.at("algorithm").get<std::string>());
    if (!alg) throw StoreError("bad algorithm tag");
    e.algorithm = *alg;
    const auto& sim = j.at("similarity");
    if (!sim.is_null()) e.similarity = sim.get<double>();
    e.image_ref = j.at("image_ref").get<std::string>();
    const auto& c = j.at("config");
    e.config.t = c.at("t").get<int>();
    e.config.s = c.at("s").get<double>();
    e.config.lower = c.at("lower").get<std::int64_t>();
    e.config.upper = c.at("upper").get<std::int64_t>();
    return e;
  } catch (const json::exception& ex) {
    throw StoreError(std::string("malformed event: ") + ex.what());
  }
}

EventRecord record_from_json(const json& j) {
  EventRecord r;
  r.event = event_from_json(j);
  try {
    r.storage_seq = j.at("storage_seq").get<std::uint64_t>();
  } catch (const json::exception& ex) {
    throw StoreError(std::string("malformed event record: ") + ex.what());
  }
  return r;
}

Warning warning_from_json(const json& j) {
  try {
    Warning w;
    w.seq = j.at("seq").get<std::uint64_t>();
    w.event_seq = j.at("event_seq").get<std::uint64_t>();
    const auto ts = parse_instant(j.at("ts").get<std::string>());
    if (!ts) throw StoreError("bad timestamp");
    w.timestamp = *ts;
    w.count = j.at("count").get<std::int64_t>();
    w.message = j.at("message").get<std::string>();
    return w;
  } catch (const json::exception& ex) {
    throw StoreError(std::string("malformed warning: ") + ex.what());
  }
}

EventLogWriter::EventLogWriter(const std::filesystem::path& path)
    : path_(path), out_(path, std::ios::binary | std::ios::app) {
  if (!out_) throw StoreError("cannot open event log " + path.string());
}

void EventLogWriter::write(const DetectionEvent& event) {
  out_ << event_line(event) << '\n';
  out_.flush();
  if (!out_) throw StoreError("write failed: " + path_.string());
}

}  // namespace trapsight
