#include "trapsight/http_api.hpp"

#include <httplib.h>

#include <charconv>
#include <limits>

#include "trapsight/event_log.hpp"

namespace trapsight {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void send_json(httplib::Response& res, int status, const ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message,
                const std::vector<ConfigError::Field>& fields = {}) {
  ordered_json body;
  body["error"] = message;
  if (!fields.empty()) {
    auto arr = ordered_json::array();
    for (const auto& f : fields) arr.push_back({{"field", f.field}, {"message", f.message}});
    body["fields"] = arr;
  }
  send_json(res, status, body);
}

ordered_json event_summary(const std::optional<DetectionEvent>& e) {
  return e ? to_json(*e) : ordered_json(nullptr);
}

}  // namespace

struct HttpApi::Impl {
  Monitor& monitor;
  Store& store;
  ConfigRegistry& config;
  WarningFeed& warnings;
  Clock clock;
  httplib::Server server;

  Impl(Monitor& m, Store& s, ConfigRegistry& c, WarningFeed& w, Clock clk)
      : monitor(m), store(s), config(c), warnings(w), clock(std::move(clk)) {
    routes();
  }

  void routes() {
    server.Get("/api/status", [this](const httplib::Request&, httplib::Response& res) {
      const auto st = monitor.status();
      ordered_json j;
      j["uptime_s"] = std::chrono::duration<double>(clock() - st.started_at).count();
      j["frames_processed"] = st.frames_processed;
      j["frames_rejected"] = st.frames_rejected;
      j["events_dropped"] = st.events_dropped;
      j["config_version"] = st.config->version;
      j["last_event"] = event_summary(st.last_event);
      j["capture_available"] = st.next_capture_frame.has_value();
      j["warnings_head"] = warnings.head();
      send_json(res, 200, j);
    });

    server.Get("/api/config", [this](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, to_json(*config.snapshot()));
    });

    server.Put("/api/config", [this](const httplib::Request& req, httplib::Response& res) {
      json body;
      try {
        body = json::parse(req.body);
      } catch (const json::exception& ex) {
        send_error(res, 400, std::string("body is not JSON: ") + ex.what());
        return;
      }
      try {
        send_json(res, 200, to_json(*config.update_from_json(body)));
      } catch (const ConfigError& ex) {
        send_error(res, 400, ex.what(), ex.fields());
      }
    });

    server.Get("/api/events", [this](const httplib::Request& req, httplib::Response& res) {
      Instant from = Instant::min();
      Instant to = Instant::max();
      for (const auto& [key, dst] : {std::pair{"from", &from}, std::pair{"to", &to}}) {
        if (!req.has_param(key) || req.get_param_value(key).empty()) continue;
        const auto t = parse_instant(req.get_param_value(key));
        if (!t) {
          send_error(res, 400, std::string("malformed '") + key + "' instant");
          return;
        }
        *dst = *t;
      }
      try {
        auto arr = ordered_json::array();
        for (const auto& r : store.query_events(from, to)) arr.push_back(to_json(r));
        send_json(res, 200, arr);
      } catch (const RangeError& ex) {
        send_error(res, 400, ex.what());
      }
    });

    server.Get("/api/calendar", [this](const httplib::Request& req, httplib::Response& res) {
      const auto month = parse_year_month(req.get_param_value("month"));
      if (!month) {
        send_error(res, 400, "month must be YYYY-MM");
        return;
      }
      ordered_json j = ordered_json::object();
      for (const auto& [day, count] : store.calendar_counts(*month)) j[std::to_string(day)] = count;
      send_json(res, 200, j);
    });

    server.Get(R"(/api/images/([A-Za-z0-9]+))", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      const auto ref = store.find_image(id);
      if (!ref) {
        send_error(res, 404, "unknown image id " + id);
        return;
      }
      try {
        const Bytes bytes = store.get_image(id);
        res.status = 200;
        res.set_content(std::string(bytes.begin(), bytes.end()), std::string(content_type(ref->format)));
      } catch (const StoreError& ex) {
        send_error(res, 500, ex.what());
      }
    });

    server.Get("/api/warnings", [this](const httplib::Request& req, httplib::Response& res) {
      std::uint64_t cursor = 0;
      if (req.has_param("cursor")) {
        const std::string text = req.get_param_value("cursor");
        const auto* end = text.data() + text.size();
        const auto [ptr, ec] = std::from_chars(text.data(), end, cursor);
        if (text.empty() || ec != std::errc{} || ptr != end) {
          send_error(res, 400, "cursor must be a non-negative integer");
          return;
        }
      }
      const auto batch = warnings.since(cursor);
      ordered_json j;
      auto arr = ordered_json::array();
      for (const auto& w : batch.warnings) arr.push_back(to_json(w));
      j["warnings"] = arr;
      j["cursor"] = batch.cursor;
      send_json(res, 200, j);
    });

    server.Post("/api/capture", [this](const httplib::Request&, httplib::Response& res) {
      try {
        const auto outcome = monitor.capture();
        ordered_json j;
        j["event"] = to_json(outcome.record);
        j["warning"] = outcome.warning ? to_json(*outcome.warning) : ordered_json(nullptr);
        send_json(res, 200, j);
      } catch (const CaptureUnavailable& ex) {
        send_error(res, 409, ex.what());
      }
    });

    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& ex) {
        send_error(res, 500, ex.what());
      } catch (...) {
        send_error(res, 500, "unknown error");
      }
    });
  }
};

HttpApi::HttpApi(Monitor& monitor, Store& store, ConfigRegistry& config, WarningFeed& warnings, Clock clock)
    : impl_(std::make_unique<Impl>(monitor, store, config, warnings, std::move(clock))) {}

HttpApi::~HttpApi() { stop(); }

int HttpApi::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpApi::listen_after_bind() { return impl_->server.listen_after_bind(); }

void HttpApi::stop() {
  if (impl_) impl_->server.stop();
}

void HttpApi::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace trapsight
