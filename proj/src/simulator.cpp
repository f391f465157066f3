#include "trapsight/simulator.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "trapsight/errors.hpp"
#include "trapsight/imaging.hpp"

namespace trapsight::sim {
namespace {

constexpr double kMinAreaPx = 27'785.0;
constexpr double kMaxAreaPx = 266'000.0;

// Runs fn(i) for i in [0, n) on up to `threads` workers and sums the results.
template <typename Fn>
std::size_t parallel_count(std::size_t n, unsigned threads, Fn fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    std::size_t total = 0;
    for (std::size_t i = 0; i < n; ++i) total += fn(i) ? 1 : 0;
    return total;
  }
  std::vector<std::size_t> partial(threads, 0);
  {
    std::vector<std::jthread> workers;
    for (unsigned w = 0; w < threads; ++w) {
      workers.emplace_back([&, w] {
        for (std::size_t i = w; i < n; i += threads) partial[w] += fn(i) ? 1 : 0;
      });
    }
  }
  std::size_t total = 0;
  for (auto p : partial) total += p;
  return total;
}

struct Extent {
  int half_w;
  int half_h;
};

Extent candidate_extent(const ScriptedObject& object, double& semi_major, double& semi_minor) {
  const double aspect = std::max(1.0, object.aspect);
  semi_major = std::sqrt(static_cast<double>(object.spec.pixel_area) * aspect / std::numbers::pi);
  semi_minor = semi_major / aspect;
  return {static_cast<int>(std::ceil(semi_major)) + 2, static_cast<int>(std::ceil(semi_minor)) + 2};
}

Component::Box object_box(const ScriptedObject& object) {
  double a = 0, b = 0;
  const Extent e = candidate_extent(object, a, b);
  return {object.x - e.half_w, object.y - e.half_h, object.x + e.half_w, object.y + e.half_h};
}

bool boxes_overlap(const Component::Box& p, const Component::Box& q, int gap) {
  return !(p.max_x + gap < q.min_x || q.max_x + gap < p.min_x || p.max_y + gap < q.min_y ||
           q.max_y + gap < p.min_y);
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(splitmix64(master) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

double uniform01(Engine& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::int64_t uniform_int(Engine& rng, std::int64_t lo, std::int64_t hi) {
  if (hi <= lo) return lo;
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  // Rejection keeps the draw unbiased.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % span;
  std::uint64_t v = rng();
  while (v >= limit) v = rng();
  return lo + static_cast<std::int64_t>(v % span);
}

void SensorModel::require_valid() const {
  std::vector<ConfigError::Field> errors;
  if (!(refresh_hz > 0.0)) errors.push_back({"refresh_hz", "must be positive"});
  if (!(path_end_mm < trigger_distance_mm && trigger_distance_mm < path_start_mm)) {
    errors.push_back({"trigger_distance_mm", "must lie strictly between path_end_mm and path_start_mm"});
  }
  if (!(size_ref_mm > kMinBodyLengthMm)) errors.push_back({"size_ref_mm", "must exceed 3.5"});
  if (!(gamma > 0.0)) errors.push_back({"gamma", "must be positive"});
  if (!errors.empty()) throw ConfigError("invalid sensor model", std::move(errors));
}

double detection_probability(double body_length_mm, const SensorModel& model) {
  const double x = std::clamp((body_length_mm - kMinBodyLengthMm) / (model.size_ref_mm - kMinBodyLengthMm), 0.0, 1.0);
  return std::pow(x, model.gamma);
}

std::pair<double, double> in_zone_window(double speed_mm_s, const SensorModel& model) {
  const double enter = (model.path_start_mm - model.trigger_distance_mm) / speed_mm_s;
  const double turn = (model.path_start_mm - model.path_end_mm) / speed_mm_s;
  const double leave = turn + (model.trigger_distance_mm - model.path_end_mm) / speed_mm_s;
  return {enter, leave};
}

double analytic_phase_fraction(double speed_mm_s, const SensorModel& model) {
  const auto [enter, leave] = in_zone_window(speed_mm_s, model);
  return std::min(1.0, (leave - enter) * model.refresh_hz);
}

bool simulate_pass(const WeevilSpec& spec, const SensorModel& model, double phase_s, Engine& rng) {
  const double p = detection_probability(spec.body_length_mm, model);
  const double period = 1.0 / model.refresh_hz;
  const auto [enter, leave] = in_zone_window(spec.speed_mm_s, model);
  const double first = std::max(0.0, std::ceil((enter - phase_s) / period));
  for (auto k = static_cast<std::uint64_t>(first);; ++k) {
    const double t = phase_s + static_cast<double>(k) * period;
    if (t >= leave) break;
    if (t <= enter) continue;
    if (uniform01(rng) < p) return true;
  }
  return false;
}

double trigger_rate(const WeevilSpec& spec, const SensorModel& model, std::size_t trials, std::uint64_t seed,
                    unsigned threads) {
  model.require_valid();
  if (trials == 0) throw ConfigError("trigger_rate needs at least one trial");
  if (!(spec.speed_mm_s > 0.0)) throw ConfigError("speed must be positive");
  const double period = 1.0 / model.refresh_hz;
  const std::size_t hits = parallel_count(trials, threads, [&](std::size_t i) {
    Engine rng(derive_seed(seed, i));
    const double phase = uniform01(rng) * period;
    return simulate_pass(spec, model, phase, rng);
  });
  return 100.0 * static_cast<double>(hits) / static_cast<double>(trials);
}

std::string SweepTable::to_csv() const {
  std::string out = "size_mm,speed_mm_s,trigger_rate_pct\n";
  for (const auto& c : cells) out += fmt::format("{},{},{:.1f}\n", c.size_mm, c.speed_mm_s, c.trigger_rate_pct);
  return out;
}

nlohmann::ordered_json SweepTable::to_json() const {
  nlohmann::ordered_json j;
  j["sizes_mm"] = sizes;
  j["speeds_mm_s"] = speeds;
  auto rows = nlohmann::ordered_json::array();
  for (std::size_t s = 0; s < speeds.size(); ++s) {
    auto row = nlohmann::ordered_json::array();
    for (std::size_t z = 0; z < sizes.size(); ++z) row.push_back(rate(s, z));
    rows.push_back(row);
  }
  j["trigger_rate_pct"] = rows;
  return j;
}

SweepTable experiment3_sweep(std::span<const double> sizes, std::span<const double> speeds, const SensorModel& model,
                             std::size_t trials, std::uint64_t seed, unsigned threads) {
  if (sizes.empty() || speeds.empty()) throw ConfigError("sweep needs at least one size and one speed");
  SweepTable table;
  table.sizes.assign(sizes.begin(), sizes.end());
  table.speeds.assign(speeds.begin(), speeds.end());
  for (double speed : speeds) {
    for (double size : sizes) {
      WeevilSpec spec;
      spec.body_length_mm = size;
      spec.speed_mm_s = speed;
      spec.pixel_area = pixel_area_for_length(size);
      // Same seed in every cell: common random numbers keep rows monotone.
      table.cells.push_back({size, speed, trigger_rate(spec, model, trials, seed, threads)});
    }
  }
  return table;
}

std::vector<double> default_sweep_sizes() {
  std::vector<double> sizes;
  for (int i = 0; i <= 10; ++i) {
    const double mm = kMinBodyLengthMm + (kMaxBodyLengthMm - kMinBodyLengthMm) * i / 10.0;
    sizes.push_back(std::round(mm * 100.0) / 100.0);
  }
  return sizes;
}

std::vector<double> default_sweep_speeds() { return {1.8, 20.0, 1518.17}; }

GammaCalibration calibrate_gamma(const SensorModel& base, const GammaTarget& target, std::size_t trials,
                                 std::uint64_t seed, int max_iterations) {
  WeevilSpec spec;
  spec.body_length_mm = target.size_mm;
  spec.speed_mm_s = target.speed_mm_s;
  auto rate_at = [&](double gamma) {
    SensorModel m = base;
    m.gamma = gamma;
    return trigger_rate(spec, m, trials, seed);
  };

  GammaCalibration out;
  double lo = target.gamma_lo;
  double hi = target.gamma_hi;
  double r_lo = rate_at(lo);
  double r_hi = rate_at(hi);
  if (r_hi > target.rate_pct) {
    out = {hi, r_hi, r_hi - target.rate_pct, true, 0};
    return out;
  }
  if (r_lo < target.rate_pct) {
    out = {lo, r_lo, r_lo - target.rate_pct, true, 0};
    return out;
  }
  int it = 0;
  for (; it < max_iterations && hi - lo > 1e-6; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double r = rate_at(mid);
    if (r > target.rate_pct) {
      lo = mid;
      r_lo = r;
    } else {
      hi = mid;
      r_hi = r;
    }
  }
  if (std::abs(r_lo - target.rate_pct) <= std::abs(r_hi - target.rate_pct)) {
    out = {lo, r_lo, r_lo - target.rate_pct, false, it};
  } else {
    out = {hi, r_hi, r_hi - target.rate_pct, false, it};
  }
  return out;
}

std::int64_t pixel_area_for_length(double body_length_mm) {
  const double slope = (kMaxAreaPx - kMinAreaPx) / (kMaxBodyLengthMm - kMinBodyLengthMm);
  return std::max<std::int64_t>(1, std::llround(kMinAreaPx + (body_length_mm - kMinBodyLengthMm) * slope));
}

double length_for_pixel_area(std::int64_t pixel_area) {
  const double slope = (kMaxBodyLengthMm - kMinBodyLengthMm) / (kMaxAreaPx - kMinAreaPx);
  return kMinBodyLengthMm + (static_cast<double>(pixel_area) - kMinAreaPx) * slope;
}

void TrapScenario::require_valid() const {
  std::vector<ConfigError::Field> errors;
  if (width < 1 || height < 1) errors.push_back({"width", "frame must be at least 1x1"});
  if (background < 0 || background > 255) errors.push_back({"background", "must be within [0, 255]"});
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (frames[i] < frames[i - 1]) errors.push_back({"frames", "schedule must be non-decreasing"});
  }
  for (const auto& o : objects) {
    const std::string f = "objects[" + o.id + "]";
    if (o.spec.gray_level < 0 || o.spec.gray_level > 255) errors.push_back({f, "gray_level must be within [0, 255]"});
    if (o.spec.pixel_area < 1) errors.push_back({f, "pixel_area must be at least 1"});
    if (o.depart_frame && *o.depart_frame <= o.appear_frame) errors.push_back({f, "must appear before it departs"});
    if (o.dead && o.depart_frame) errors.push_back({f, "a dead object cannot depart"});
    if (o.spec.pixel_area >= 1) {
      const auto box = object_box(o);
      if (box.min_x < 0 || box.min_y < 0 || box.max_x >= width || box.max_y >= height) {
        errors.push_back({f, "does not fit inside the frame"});
      }
    }
  }
  if (!errors.empty()) throw ConfigError("invalid scenario", std::move(errors));
}

std::vector<std::pair<int, int>> rasterize_object(const ScriptedObject& object) {
  double a = 0, b = 0;
  const Extent e = candidate_extent(object, a, b);
  struct Candidate {
    double r2;
    int dy;
    int dx;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(static_cast<std::size_t>(2 * e.half_w + 1) * static_cast<std::size_t>(2 * e.half_h + 1));
  for (int dy = -e.half_h; dy <= e.half_h; ++dy) {
    for (int dx = -e.half_w; dx <= e.half_w; ++dx) {
      const double u = dx / a;
      const double v = dy / b;
      candidates.push_back({u * u + v * v, dy, dx});
    }
  }
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(object.spec.pixel_area), candidates.size());
  auto less = [](const Candidate& p, const Candidate& q) {
    if (p.r2 != q.r2) return p.r2 < q.r2;
    if (p.dy != q.dy) return p.dy < q.dy;
    return p.dx < q.dx;
  };
  std::nth_element(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(n), candidates.end(), less);
  std::vector<std::pair<int, int>> pixels;
  pixels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) pixels.emplace_back(object.x + candidates[i].dx, object.y + candidates[i].dy);
  return pixels;
}

ColorImage render_frame(const TrapScenario& scenario, std::size_t frame_index) {
  if (frame_index >= scenario.frames.size()) {
    throw std::out_of_range(fmt::format("frame {} outside schedule of {}", frame_index, scenario.frames.size()));
  }
  const auto bg = static_cast<std::uint8_t>(scenario.background);
  ColorImage frame(scenario.width, scenario.height, Rgb{bg, bg, bg});
  for (const auto& o : scenario.objects) {
    if (!o.visible_at(frame_index)) continue;
    const auto g = static_cast<std::uint8_t>(o.spec.gray_level);
    for (const auto& [x, y] : rasterize_object(o)) {
      if (x < 0 || y < 0 || x >= scenario.width || y >= scenario.height) continue;
      frame.at(x, y) = Rgb{g, g, g};
    }
  }
  return frame;
}

TrapScenario scenario_from_json(const nlohmann::json& j) {
  TrapScenario s;
  try {
    s.width = j.at("width").get<int>();
    s.height = j.at("height").get<int>();
    s.background = j.value("background", 200);
    const auto& frames = j.at("frames");
    if (frames.is_array()) {
      for (const auto& f : frames) {
        const auto t = parse_instant(f.get<std::string>());
        if (!t) throw ConfigError("frames: bad instant " + f.get<std::string>());
        s.frames.push_back(*t);
      }
    } else {
      const auto start = parse_instant(frames.at("start").get<std::string>());
      if (!start) throw ConfigError("frames.start: bad instant");
      const double interval = frames.value("interval_s", 1.0);
      const auto count = frames.at("count").get<std::size_t>();
      for (std::size_t i = 0; i < count; ++i) {
        s.frames.push_back(*start + std::chrono::milliseconds(std::llround(interval * 1000.0 * static_cast<double>(i))));
      }
    }
    std::size_t index = 0;
    for (const auto& o : j.value("objects", nlohmann::json::array())) {
      ScriptedObject obj;
      obj.id = o.value("id", fmt::format("obj{}", index++));
      const auto& spec = o.at("spec");
      obj.spec.pixel_area = spec.at("pixel_area").get<std::int64_t>();
      obj.spec.gray_level = spec.at("gray_level").get<int>();
      obj.spec.body_length_mm = spec.value("body_length_mm", length_for_pixel_area(obj.spec.pixel_area));
      obj.spec.speed_mm_s = spec.value("speed_mm_s", 20.0);
      obj.x = o.at("x").get<int>();
      obj.y = o.at("y").get<int>();
      obj.aspect = o.value("aspect", 2.0);
      obj.appear_frame = o.value("appear_frame", std::size_t{0});
      if (o.contains("depart_frame") && !o.at("depart_frame").is_null()) {
        obj.depart_frame = o.at("depart_frame").get<std::size_t>();
      }
      obj.dead = o.value("dead", false);
      s.objects.push_back(std::move(obj));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("malformed scenario: ") + ex.what());
  }
  s.require_valid();
  return s;
}

nlohmann::ordered_json to_json(const TrapScenario& scenario) {
  nlohmann::ordered_json j;
  j["width"] = scenario.width;
  j["height"] = scenario.height;
  j["background"] = scenario.background;
  auto frames = nlohmann::ordered_json::array();
  for (const auto& f : scenario.frames) frames.push_back(format_instant(f));
  j["frames"] = frames;
  auto objects = nlohmann::ordered_json::array();
  for (const auto& o : scenario.objects) {
    nlohmann::ordered_json jo;
    jo["id"] = o.id;
    jo["spec"] = {{"body_length_mm", o.spec.body_length_mm},
                  {"speed_mm_s", o.spec.speed_mm_s},
                  {"gray_level", o.spec.gray_level},
                  {"pixel_area", o.spec.pixel_area}};
    jo["x"] = o.x;
    jo["y"] = o.y;
    jo["aspect"] = o.aspect;
    jo["appear_frame"] = o.appear_frame;
    jo["depart_frame"] = o.depart_frame ? nlohmann::ordered_json(*o.depart_frame) : nlohmann::ordered_json(nullptr);
    jo["dead"] = o.dead;
    objects.push_back(jo);
  }
  j["objects"] = objects;
  return j;
}

TrapScenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(path.string() + ": " + ex.what());
  }
  return scenario_from_json(j);
}

TrapScenario dead_weevil_scenario(bool with_dead, std::uint64_t trial_seed, const DeadWeevilOptions& options) {
  Engine rng(trial_seed);
  TrapScenario s;
  s.width = options.width;
  s.height = options.height;
  s.background = options.background;
  s.frames = {Instant{}, Instant{} + std::chrono::seconds(1)};

  const auto& cfg = options.config;
  std::vector<Component::Box> taken;
  auto place = [&](ScriptedObject obj) {
    for (int attempt = 0; attempt < 10'000; ++attempt) {
      obj.x = 0;
      obj.y = 0;
      const auto box = object_box(obj);
      const int hw = box.max_x;
      const int hh = box.max_y;
      if (2 * hw + 1 > s.width || 2 * hh + 1 > s.height) break;
      obj.x = static_cast<int>(uniform_int(rng, hw, s.width - 1 - hw));
      obj.y = static_cast<int>(uniform_int(rng, hh, s.height - 1 - hh));
      const auto placed = object_box(obj);
      const bool clear = std::none_of(taken.begin(), taken.end(), [&](const Component::Box& t) {
        return boxes_overlap(t, placed, options.gap_px);
      });
      if (clear) {
        taken.push_back(placed);
        s.objects.push_back(std::move(obj));
        return;
      }
    }
    throw ConfigError("could not place object without overlap; frame too crowded");
  };
  auto weevil = [&](std::string id, std::int64_t area) {
    ScriptedObject obj;
    obj.id = std::move(id);
    obj.spec.pixel_area = area;
    obj.spec.body_length_mm = length_for_pixel_area(area);
    obj.spec.gray_level = static_cast<int>(uniform_int(rng, 10, std::max(10, cfg.t - 10)));
    obj.aspect = 1.5 + uniform01(rng);
    return obj;
  };

  const auto dead_count = with_dead ? uniform_int(rng, options.min_dead, options.max_dead) : 0;
  for (std::int64_t i = 0; i < dead_count; ++i) {
    auto obj = weevil(fmt::format("dead{}", i), uniform_int(rng, cfg.lower, cfg.upper));
    obj.dead = true;
    obj.appear_frame = 0;
    place(std::move(obj));
  }
  const auto new_count = uniform_int(rng, options.min_new, options.max_new);
  if (new_count > 0) {
    const std::int64_t cap = std::min(cfg.upper, options.new_area_budget / new_count);
    if (cap < cfg.lower) throw ConfigError("area budget cannot fit the requested number of arrivals");
    for (std::int64_t i = 0; i < new_count; ++i) {
      auto obj = weevil(fmt::format("new{}", i), uniform_int(rng, cfg.lower, cap));
      obj.appear_frame = 1;
      place(std::move(obj));
    }
  }
  s.require_valid();
  return s;
}

DeadWeevilResult run_dead_weevil_trials(std::size_t trials, bool with_dead, std::uint64_t seed,
                                        const DeadWeevilOptions& options) {
  if (trials == 0) throw ConfigError("dead-weevil trials need at least one trial");
  DeadWeevilResult result;
  result.trials = trials;
  result.outcomes.resize(trials);
  parallel_count(trials, options.threads, [&](std::size_t i) {
    const TrapScenario scenario = dead_weevil_scenario(with_dead, derive_seed(seed, i), options);
    TrialOutcome& out = result.outcomes[i];
    for (const auto& o : scenario.objects) (o.dead ? out.dead : out.new_objects) += 1;
    Detector detector;
    detector.process(render_frame(scenario, 0), options.config, scenario.frames[0], {});
    const auto second = detector.process(render_frame(scenario, 1), options.config, scenario.frames[1], {});
    out.reported = second.event.count;
    out.algorithm = second.event.algorithm;
    out.similarity = second.event.similarity;
    out.correct = out.reported == static_cast<std::int64_t>(out.new_objects);
    return out.correct;
  });
  for (const auto& o : result.outcomes) result.correct += o.correct ? 1 : 0;
  result.accuracy_pct = 100.0 * static_cast<double>(result.correct) / static_cast<double>(trials);
  return result;
}

}  // namespace trapsight::sim
