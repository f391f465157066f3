#include "trapsight/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include "trapsight/calibration.hpp"
#include "trapsight/config_registry.hpp"
#include "trapsight/detect_run.hpp"
#include "trapsight/errors.hpp"
#include "trapsight/http_api.hpp"
#include "trapsight/imaging.hpp"
#include "trapsight/image_io.hpp"
#include "trapsight/monitor.hpp"
#include "trapsight/simulator.hpp"
#include "trapsight/store.hpp"

namespace trapsight {
namespace {

namespace fs = std::filesystem;

// "100" for 100.0, "97.5" for 97.5.
std::string percent(double v) {
  std::string s = fmt::format("{:.2f}", v);
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s + "%";
}

Instant require_instant(const std::string& text, const char* flag) {
  const auto t = parse_instant(text);
  if (!t) throw ConfigError(fmt::format("{}: cannot parse instant '{}'", flag, text));
  return *t;
}

struct DetectArgs {
  std::string input;
  std::string config;
  std::string out = "out";
  std::string start = "1970-01-01T00:00:00Z";
  double interval_s = 1.0;
};

struct SweepArgs {
  std::vector<double> sizes;
  std::vector<double> speeds;
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  std::optional<double> gamma;
  double size_ref = 12.0;
  std::string csv;
  std::string json;
  unsigned threads = 1;
};

struct DeadArgs {
  std::size_t trials = 10;
  std::uint64_t seed = 1;
  bool without_dead = false;
  unsigned threads = 1;
  bool verbose = false;
};

struct RenderArgs {
  std::string scenario;
  std::string out;
  std::string format = "png";
};

struct SimilarityArgs {
  std::int64_t max_area = 266'000;
  int width = 3856;
  int height = 2490;
};

struct GrayscaleArgs {
  std::string corpus;
  int margin = 15;
};

struct SynthArgs {
  std::string out;
  int per_class = 25;
  std::uint64_t seed = 1;
};

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data;
  std::string config;
  std::string scenario;
  int report_offset_min = 0;
};

int cmd_detect(const DetectArgs& a, std::ostream& out, std::ostream& err) {
  DetectRunOptions opts;
  opts.input = a.input;
  if (!a.config.empty()) opts.config = load_config(a.config);
  opts.out = a.out;
  opts.start = require_instant(a.start, "--start");
  opts.interval = std::chrono::milliseconds(std::llround(a.interval_s * 1000.0));
  const auto summary = run_detection(opts);
  for (const auto& e : summary.errors) fmt::print(err, "rejected frame {}: {}\n", e.source, e.reason);
  fmt::print(out, "frames: {}\nrejected: {}\nweevils: {}\nwarnings: {}\nevent log: {}\n", summary.frames,
             summary.rejected, summary.total_count, summary.warnings, summary.event_log.string());
  return 0;
}

int cmd_sweep(const SweepArgs& a, std::ostream& out, std::ostream& err) {
  sim::SensorModel model;
  model.size_ref_mm = a.size_ref;
  if (a.gamma) {
    model.gamma = *a.gamma;
  } else {
    const auto cal = sim::calibrate_gamma(model, {}, a.trials, a.seed);
    model.gamma = cal.gamma;
    fmt::print(err, "# gamma {:.4f} calibrated: medium-speed 16 mm rate {:.1f}% (residual {:+.1f}{})\n", cal.gamma,
               cal.achieved_rate_pct, cal.residual_pct, cal.saturated ? ", saturated" : "");
  }
  const auto sizes = a.sizes.empty() ? sim::default_sweep_sizes() : a.sizes;
  const auto speeds = a.speeds.empty() ? sim::default_sweep_speeds() : a.speeds;
  const auto table = sim::experiment3_sweep(sizes, speeds, model, a.trials, a.seed, a.threads);
  if (a.csv.empty()) {
    out << table.to_csv();
  } else {
    std::ofstream f(a.csv);
    f << table.to_csv();
    if (!f) throw StoreError("cannot write " + a.csv);
    fmt::print(out, "wrote {}\n", a.csv);
  }
  if (!a.json.empty()) {
    auto j = table.to_json();
    j["gamma"] = model.gamma;
    j["size_ref_mm"] = model.size_ref_mm;
    j["trials"] = a.trials;
    j["seed"] = a.seed;
    std::ofstream f(a.json);
    f << j.dump(2) << '\n';
    if (!f) throw StoreError("cannot write " + a.json);
  }
  return 0;
}

int cmd_dead(const DeadArgs& a, std::ostream& out) {
  sim::DeadWeevilOptions opts;
  opts.threads = a.threads;
  const bool with_dead = !a.without_dead;
  const auto r = sim::run_dead_weevil_trials(a.trials, with_dead, a.seed, opts);
  if (a.verbose) {
    for (std::size_t i = 0; i < r.outcomes.size(); ++i) {
      const auto& o = r.outcomes[i];
      fmt::print(out, "trial {}: dead {} new {} reported {} algorithm {} {}\n", i + 1, o.dead, o.new_objects,
                 o.reported, to_string(o.algorithm), o.correct ? "ok" : "WRONG");
    }
  }
  fmt::print(out, "scenario: {}\ntrials: {}\ncorrect: {}\naccuracy: {}\n",
             with_dead ? "with dead weevils" : "without dead weevils", r.trials, r.correct, percent(r.accuracy_pct));
  return 0;
}

int cmd_render(const RenderArgs& a, std::ostream& out) {
  const auto scenario = sim::load_scenario(a.scenario);
  fs::create_directories(a.out);
  for (std::size_t i = 0; i < scenario.frames.size(); ++i) {
    const ColorImage frame = sim::render_frame(scenario, i);
    Bytes bytes;
    if (a.format == "png") {
      bytes = encode_png(frame);
    } else if (a.format == "ppm") {
      bytes = encode_ppm(frame);
    } else {
      bytes = encode_pgm(to_grayscale(frame));
    }
    write_file_atomic(fs::path(a.out) / fmt::format("frame_{:04d}.{}", i, a.format), bytes);
  }
  fmt::print(out, "wrote {} frames to {}\n", scenario.frames.size(), a.out);
  return 0;
}

int cmd_similarity(const SimilarityArgs& a, std::ostream& out) {
  fmt::print(out, "{:.4f}\n", similarity_threshold(a.max_area, a.width, a.height));
  return 0;
}

int cmd_grayscale(const GrayscaleArgs& a, std::ostream& out, std::ostream& err) {
  const auto corpus = load_corpus(a.corpus);
  const auto report = grayscale_stats(corpus);
  for (const auto& r : report.rejected) fmt::print(err, "rejected sample {}: {}\n", r.index, r.reason);
  fmt::print(out, "{:<12} {:>8} {:>10} {:>8} {:>5} {:>5}\n", "class", "samples", "pixels", "mean", "min", "max");
  nlohmann::ordered_json j;
  auto classes = nlohmann::ordered_json::array();
  for (const auto& c : report.classes) {
    fmt::print(out, "{:<12} {:>8} {:>10} {:>8.2f} {:>5} {:>5}\n", c.class_name, c.sample_count, c.pixel_count, c.mean,
               c.min, c.max);
    classes.push_back({{"class", c.class_name},
                       {"sample_count", c.sample_count},
                       {"pixel_count", c.pixel_count},
                       {"mean", c.mean},
                       {"min", c.min},
                       {"max", c.max}});
  }
  j["classes"] = classes;
  j["rejected"] = report.rejected.size();
  try {
    const auto rec = recommend_thresholds(report.classes, a.margin);
    fmt::print(out, "recommendation: {}\n", rec.note);
    j["recommended_t"] = rec.t ? nlohmann::ordered_json(*rec.t) : nlohmann::ordered_json(nullptr);
  } catch (const ConfigError& ex) {
    fmt::print(out, "recommendation: unavailable ({})\n", ex.what());
    j["recommended_t"] = nullptr;
  }
  out << j.dump() << '\n';
  return 0;
}

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  SyntheticCorpusOptions opts;
  opts.samples_per_class = a.per_class;
  opts.seed = a.seed;
  const auto manifest = write_corpus(synthetic_corpus(opts), a.out);
  fmt::print(out, "{}\n", manifest.string());
  return 0;
}

int cmd_serve(const ServeArgs& a, std::ostream& out) {
  std::string data = a.data;
  if (data.empty()) {
    const char* env = std::getenv("TRAPSIGHT_DATA");
    data = env && *env ? env : "data";
  }
  FileStore store(data, FileStoreOptions{std::chrono::minutes(a.report_offset_min)});
  ConfigRegistry config(a.config.empty() ? DetectionConfig{} : load_config(a.config));
  WarningFeed warnings(fs::path(data) / "warnings.jsonl");
  Monitor monitor(store, config, warnings);
  if (!a.scenario.empty()) monitor.set_scenario(sim::load_scenario(a.scenario));
  HttpApi api(monitor, store, config, warnings);

  const int port = api.bind(a.host, a.port);
  if (port < 0) throw Error(fmt::format("cannot bind {}:{}", a.host, a.port));

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);
  std::thread server([&] { api.listen_after_bind(); });
  api.wait_until_ready();
  fmt::print(out, "listening on http://{}:{} (data {})\n", a.host, port, data);
  out.flush();
  int sig = 0;
  sigwait(&signals, &sig);
  api.stop();
  server.join();
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Threshold-based weevil trap: detection, simulation, calibration and service", "trapsight"};
  app.require_subcommand(1);

  DetectArgs detect_args;
  auto* detect = app.add_subcommand("detect", "Run the detector");
  detect->require_subcommand(1);
  auto* detect_run = detect->add_subcommand("run", "Process a frame directory or scenario file");
  detect_run->add_option("--input", detect_args.input, "Frame directory or scenario .json")->required();
  detect_run->add_option("--config", detect_args.config, "Detection config JSON");
  detect_run->add_option("--out", detect_args.out, "Output directory")->capture_default_str();
  detect_run->add_option("--start", detect_args.start, "Timestamp of the first directory frame")->capture_default_str();
  detect_run->add_option("--interval-s", detect_args.interval_s, "Seconds between directory frames")
      ->capture_default_str();

  auto* simulate = app.add_subcommand("simulate", "Virtual trap experiments");
  simulate->require_subcommand(1);
  SweepArgs sweep_args;
  auto* sweep = simulate->add_subcommand("sweep", "IR trigger rate over sizes and speeds (CSV)");
  sweep->add_option("--sizes", sweep_args.sizes, "Body lengths in mm")->delimiter(',');
  sweep->add_option("--speeds", sweep_args.speeds, "Speeds in mm/s")->delimiter(',');
  sweep->add_option("--trials", sweep_args.trials, "Passes per cell")->capture_default_str()->check(CLI::PositiveNumber);
  sweep->add_option("--seed", sweep_args.seed, "Master seed")->capture_default_str();
  sweep->add_option("--gamma", sweep_args.gamma, "Detectability exponent (calibrated when omitted)");
  sweep->add_option("--size-ref", sweep_args.size_ref, "Size of certain detection, mm")->capture_default_str();
  sweep->add_option("--csv", sweep_args.csv, "Write CSV here instead of stdout");
  sweep->add_option("--json", sweep_args.json, "Also write plot data as JSON");
  sweep->add_option("--threads", sweep_args.threads, "Worker threads")->capture_default_str();

  DeadArgs dead_args;
  auto* dead = simulate->add_subcommand("dead-weevil", "Dead-weevil accuracy trials");
  dead->add_option("--trials", dead_args.trials, "Number of trials")->capture_default_str()->check(CLI::PositiveNumber);
  dead->add_option("--seed", dead_args.seed, "Master seed")->capture_default_str();
  dead->add_flag("--without-dead", dead_args.without_dead, "Control run with no dead weevils in view");
  dead->add_option("--threads", dead_args.threads, "Worker threads")->capture_default_str();
  dead->add_flag("-v,--verbose", dead_args.verbose, "Print every trial");

  RenderArgs render_args;
  auto* render = simulate->add_subcommand("render", "Render a scenario's frames to image files");
  render->add_option("--scenario", render_args.scenario, "Scenario JSON")->required();
  render->add_option("--out", render_args.out, "Output directory")->required();
  render->add_option("--format", render_args.format, "png, ppm or pgm")
      ->check(CLI::IsMember({"png", "ppm", "pgm"}))
      ->capture_default_str();

  auto* calibrate = app.add_subcommand("calibrate", "Threshold calibration");
  calibrate->require_subcommand(1);
  SimilarityArgs sim_args;
  auto* similarity = calibrate->add_subcommand("similarity-threshold", "Similarity threshold from max object area");
  similarity->add_option("--max-area", sim_args.max_area, "Largest object area, pixels")->capture_default_str();
  similarity->add_option("--width", sim_args.width, "Frame width, pixels")->capture_default_str();
  similarity->add_option("--height", sim_args.height, "Frame height, pixels")->capture_default_str();

  GrayscaleArgs gray_args;
  auto* grayscale = calibrate->add_subcommand("grayscale", "Per-class grayscale statistics of a corpus");
  grayscale->add_option("--corpus", gray_args.corpus, "Corpus manifest (JSON Lines)")->required();
  grayscale->add_option("--margin", gray_args.margin, "Margin above the darkest class max")->capture_default_str();

  SynthArgs synth_args;
  auto* synth = calibrate->add_subcommand("synth-corpus", "Write the synthetic calibration corpus");
  synth->add_option("--out", synth_args.out, "Output directory")->required();
  synth->add_option("--per-class", synth_args.per_class, "Samples per class")->capture_default_str();
  synth->add_option("--seed", synth_args.seed, "Seed")->capture_default_str();

  ServeArgs serve_args;
  auto* serve = app.add_subcommand("serve", "Run the monitoring HTTP service");
  serve->add_option("--host", serve_args.host, "Bind address")->capture_default_str();
  serve->add_option("--port", serve_args.port, "Port (0 picks a free one)")->capture_default_str();
  serve->add_option("--data", serve_args.data, "Data directory (default $TRAPSIGHT_DATA or ./data)");
  serve->add_option("--config", serve_args.config, "Initial detection config JSON");
  serve->add_option("--scenario", serve_args.scenario, "Scenario used by POST /api/capture");
  serve->add_option("--report-utc-offset-min", serve_args.report_offset_min, "Calendar timezone offset, minutes")
      ->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const CLI::App* failed = &app;
    for (auto* sub : {detect_run, sweep, dead, render, similarity, grayscale, synth, serve, detect, simulate, calibrate}) {
      if (sub->parsed()) {
        failed = sub;
        break;
      }
    }
    err << failed->help();
    return 2;
  }

  try {
    if (detect_run->parsed()) return cmd_detect(detect_args, out, err);
    if (sweep->parsed()) return cmd_sweep(sweep_args, out, err);
    if (dead->parsed()) return cmd_dead(dead_args, out);
    if (render->parsed()) return cmd_render(render_args, out);
    if (similarity->parsed()) return cmd_similarity(sim_args, out);
    if (grayscale->parsed()) return cmd_grayscale(gray_args, out, err);
    if (synth->parsed()) return cmd_synth(synth_args, out);
    if (serve->parsed()) return cmd_serve(serve_args, out);
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return 1;
  }
  err << app.help();
  return 2;
}

}  // namespace trapsight
