#pragma once

// Virtual trap: IR trigger model, synthetic frame renderer, scripted
// scenarios and the dead-weevil trials.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "trapsight/detector.hpp"
#include "trapsight/image.hpp"
#include "trapsight/time.hpp"

namespace trapsight::sim {

// ---------------------------------------------------------------------------
// Random streams

// Stable across platforms: mt19937_64 is fully specified and we avoid the
// implementation-defined std distributions.
using Engine = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);
// Independent stream seed for (master, stream index).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);
// Uniform in [0, 1) from the top 53 bits.
double uniform01(Engine& rng);
// Uniform integer in [lo, hi].
std::int64_t uniform_int(Engine& rng, std::int64_t lo, std::int64_t hi);

// ---------------------------------------------------------------------------
// IR trigger model

struct WeevilSpec {
  double body_length_mm = 5.0;
  double speed_mm_s = 20.0;
  int gray_level = 30;
  std::int64_t pixel_area = 50'000;
};

struct SensorModel {
  double refresh_hz = 1.0;
  double trigger_distance_mm = 95.0;
  double path_start_mm = 110.0;
  double path_end_mm = 40.0;
  double size_ref_mm = 12.0;  // size at which detection becomes certain
  double gamma = 1.0;         // detectability exponent

  // Throws ConfigError.
  void require_valid() const;
};

inline constexpr double kMinBodyLengthMm = 3.5;
inline constexpr double kMaxBodyLengthMm = 18.0;

// Per-sample probability that an in-zone object is seen:
// clamp((L - 3.5) / (size_ref - 3.5), 0, 1) ^ gamma.
double detection_probability(double body_length_mm, const SensorModel& model);

// Time interval [enter, leave) during which the object is closer than the
// trigger distance on its approach-and-retreat pass.
std::pair<double, double> in_zone_window(double speed_mm_s, const SensorModel& model);

// Probability that at least one sample lands in the zone for a uniformly
// random phase. Closed form, used as the p = 1 reference.
double analytic_phase_fraction(double speed_mm_s, const SensorModel& model);

// One approach-and-retreat pass sampled at phase, phase + 1/f, ... The
// stream supplies one detection draw per in-zone sample.
bool simulate_pass(const WeevilSpec& spec, const SensorModel& model, double phase_s, Engine& rng);

// Percent of `trials` passes that trigger. Trial i draws its phase and its
// detection draws from derive_seed(seed, i), so results do not depend on
// `threads`.
double trigger_rate(const WeevilSpec& spec, const SensorModel& model, std::size_t trials, std::uint64_t seed,
                    unsigned threads = 1);

struct SweepCell {
  double size_mm = 0.0;
  double speed_mm_s = 0.0;
  double trigger_rate_pct = 0.0;
};

struct SweepTable {
  std::vector<double> sizes;
  std::vector<double> speeds;
  std::vector<SweepCell> cells;  // speed-major, sizes ascending within a speed

  double rate(std::size_t speed_index, std::size_t size_index) const {
    return cells[speed_index * sizes.size() + size_index].trigger_rate_pct;
  }
  // Header size_mm,speed_mm_s,trigger_rate_pct.
  std::string to_csv() const;
  nlohmann::ordered_json to_json() const;
};

// Throws ConfigError on empty inputs.
SweepTable experiment3_sweep(std::span<const double> sizes, std::span<const double> speeds, const SensorModel& model,
                             std::size_t trials, std::uint64_t seed, unsigned threads = 1);

// The eleven body lengths from 3.5 mm to 18 mm, evenly spaced.
std::vector<double> default_sweep_sizes();
// Feeding, crawling and flying speeds in mm/s.
std::vector<double> default_sweep_speeds();

struct GammaCalibration {
  double gamma = 1.0;
  double achieved_rate_pct = 0.0;
  double residual_pct = 0.0;  // achieved - target
  bool saturated = false;     // target outside what the bracket can reach
  int iterations = 0;
};

struct GammaTarget {
  double size_mm = 16.0;
  double speed_mm_s = 20.0;
  double rate_pct = 95.0;
  double gamma_lo = 1.0;
  double gamma_hi = 4.0;
};

// Bisection on gamma (trigger rate is non-increasing in gamma) under common
// random numbers. Returns the bracket end nearest the target when the
// response never crosses it.
GammaCalibration calibrate_gamma(const SensorModel& base, const GammaTarget& target, std::size_t trials,
                                 std::uint64_t seed, int max_iterations = 40);

// ---------------------------------------------------------------------------
// Frame rendering

// Linear map between 3.5 mm <-> 27,785 px and 18 mm <-> 266,000 px.
std::int64_t pixel_area_for_length(double body_length_mm);
double length_for_pixel_area(std::int64_t pixel_area);

struct ScriptedObject {
  std::string id;
  WeevilSpec spec;
  int x = 0;  // centre, pixels
  int y = 0;
  double aspect = 2.0;  // major / minor axis
  std::size_t appear_frame = 0;
  std::optional<std::size_t> depart_frame;
  bool dead = false;  // stays in view once it has appeared

  bool visible_at(std::size_t frame) const {
    if (frame < appear_frame) return false;
    return dead || !depart_frame || frame < *depart_frame;
  }
};

struct TrapScenario {
  int width = 640;
  int height = 480;
  int background = 200;
  std::vector<Instant> frames;
  std::vector<ScriptedObject> objects;

  // Throws ConfigError on objects outside the frame, departures that do not
  // follow appearance, or invalid gray levels.
  void require_valid() const;
};

// Pixels covered by an object: exactly spec.pixel_area of them, the ones
// closest to the centre in elliptical distance.
std::vector<std::pair<int, int>> rasterize_object(const ScriptedObject& object);

// Throws std::out_of_range for an index outside the schedule. Overlapping
// objects are drawn merged.
ColorImage render_frame(const TrapScenario& scenario, std::size_t frame_index);

TrapScenario scenario_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const TrapScenario& scenario);
TrapScenario load_scenario(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Dead-weevil trials

struct DeadWeevilOptions {
  int width = 3856;
  int height = 2490;
  int background = 200;
  int min_new = 0;
  int max_new = 3;
  int min_dead = 1;
  int max_dead = 4;
  // Total area of arrivals per trial. One maximal weevil by default, the
  // change budget the similarity threshold is derived from.
  std::int64_t new_area_budget = 266'000;
  int gap_px = 3;  // clearance between placed objects
  DetectionConfig config;
  unsigned threads = 1;
};

struct TrialOutcome {
  std::size_t dead = 0;
  std::size_t new_objects = 0;
  std::int64_t reported = 0;
  Algorithm algorithm = Algorithm::a;
  std::optional<double> similarity;
  bool correct = false;
};

struct DeadWeevilResult {
  std::size_t trials = 0;
  std::size_t correct = 0;
  double accuracy_pct = 0.0;
  std::vector<TrialOutcome> outcomes;
};

// Builds the two-frame scenario for one trial: dead weevils present from
// frame 0 (if with_dead), arrivals added in frame 1.
TrapScenario dead_weevil_scenario(bool with_dead, std::uint64_t trial_seed, const DeadWeevilOptions& options);

DeadWeevilResult run_dead_weevil_trials(std::size_t trials, bool with_dead, std::uint64_t seed,
                                        const DeadWeevilOptions& options = {});

}  // namespace trapsight::sim
