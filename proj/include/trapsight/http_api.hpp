#pragma once

#include <memory>
#include <string>

#include "trapsight/config_registry.hpp"
#include "trapsight/monitor.hpp"
#include "trapsight/store.hpp"
#include "trapsight/warning_feed.hpp"

namespace trapsight {

// HTTP + JSON front for the monitor:
//   GET  /api/status
//   GET  /api/config          PUT /api/config
//   GET  /api/events?from=&to=
//   GET  /api/calendar?month=YYYY-MM
//   GET  /api/images/{id}
//   GET  /api/warnings?cursor=N
//   POST /api/capture
// GET handlers never mutate state.
class HttpApi {
 public:
  HttpApi(Monitor& monitor, Store& store, ConfigRegistry& config, WarningFeed& warnings, Clock clock = system_clock());
  ~HttpApi();
  HttpApi(const HttpApi&) = delete;
  HttpApi& operator=(const HttpApi&) = delete;

  // Returns the bound port (an ephemeral one when port == 0), or -1.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace trapsight
