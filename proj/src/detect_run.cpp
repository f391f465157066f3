#include "trapsight/detect_run.hpp"

#include <algorithm>
#include <cctype>

#include "trapsight/errors.hpp"
#include "trapsight/event_log.hpp"
#include "trapsight/image_io.hpp"
#include "trapsight/simulator.hpp"

namespace trapsight {
namespace fs = std::filesystem;

namespace {

bool is_frame_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".pgm" || ext == ".ppm" || ext == ".png";
}

}  // namespace

DetectRunSummary run_detection(const DetectRunOptions& options) {
  options.config.require_valid();
  if (!fs::is_directory(options.input) && !fs::is_regular_file(options.input)) {
    throw ConfigError("input " + options.input.string() + " is neither a directory nor a scenario file");
  }
  fs::create_directories(options.out);
  FileStore store(options.out);
  ConfigRegistry config(options.config, [] { return Instant{}; });
  WarningFeed warnings;
  Monitor monitor(store, config, warnings, [] { return Instant{}; });

  DetectRunSummary summary;
  summary.event_log = options.out / "event_log.jsonl";
  fs::remove(summary.event_log);
  EventLogWriter log(summary.event_log);

  auto record = [&](const ProcessOutcome& outcome) {
    log.write(outcome.record.event);
    ++summary.frames;
    summary.total_count += outcome.record.event.count;
    if (outcome.warning) ++summary.warnings;
  };

  if (fs::is_directory(options.input)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(options.input)) {
      if (entry.is_regular_file() && is_frame_file(entry.path())) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (std::size_t i = 0; i < files.size(); ++i) {
      const Instant ts = options.start + options.interval * static_cast<std::int64_t>(i);
      Bytes bytes;
      try {
        bytes = read_file(files[i]);
      } catch (const StoreError& ex) {
        summary.errors.push_back({files[i].string(), ts, ex.what()});
        continue;
      }
      if (auto outcome = monitor.process_encoded(bytes, ts, files[i].string())) record(*outcome);
    }
    for (const auto& e : monitor.frame_errors()) summary.errors.push_back(e);
  } else {
    const auto scenario = sim::load_scenario(options.input);
    for (std::size_t i = 0; i < scenario.frames.size(); ++i) {
      record(monitor.process(sim::render_frame(scenario, i), scenario.frames[i]));
    }
  }
  summary.rejected = summary.errors.size();
  return summary;
}

}  // namespace trapsight
