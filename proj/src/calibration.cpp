#include "trapsight/calibration.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include <json.hpp>

#include "trapsight/errors.hpp"
#include "trapsight/image_io.hpp"

namespace trapsight {
namespace {

struct Accum {
  std::string name;
  std::size_t samples = 0;
  std::size_t pixels = 0;
  double sum = 0.0;
  int min = 255;
  int max = 0;
};

// Gray bands used by the synthetic corpus generator.
struct ClassBand {
  const char* name;
  int lo;
  int hi;
};
constexpr ClassBand kBands[] = {
    {"weevil", 12, 48},
    {"leaf", 85, 150},
    {"soil", 70, 125},
    {"stone", 110, 200},
};

}  // namespace

GrayscaleReport grayscale_stats(std::span<const CorpusSample> corpus) {
  GrayscaleReport report;
  std::vector<Accum> classes;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& sample = corpus[i];
    if (!sample.mask.same_shape(sample.image)) {
      report.rejected.push_back({i, "mask shape does not match image"});
      continue;
    }
    if (sample.mask.foreground_count() == 0) {
      report.rejected.push_back({i, "mask selects no pixels"});
      continue;
    }
    auto it = std::find_if(classes.begin(), classes.end(), [&](const Accum& a) { return a.name == sample.class_name; });
    if (it == classes.end()) {
      classes.push_back({sample.class_name});
      it = classes.end() - 1;
    }
    const auto px = sample.image.pixels();
    const auto mk = sample.mask.pixels();
    for (std::size_t p = 0; p < px.size(); ++p) {
      if (mk[p] != kForeground) continue;
      it->sum += px[p];
      it->min = std::min<int>(it->min, px[p]);
      it->max = std::max<int>(it->max, px[p]);
      ++it->pixels;
    }
    ++it->samples;
  }
  for (const auto& a : classes) {
    report.classes.push_back(
        {a.name, a.samples, a.pixels, a.sum / static_cast<double>(a.pixels), a.min, a.max});
  }
  return report;
}

double similarity_threshold(std::int64_t max_object_area, int width, int height) {
  if (width < 1 || height < 1) throw ConfigError("frame dimensions must be positive");
  const std::int64_t total = static_cast<std::int64_t>(width) * height;
  if (max_object_area <= 0 || max_object_area >= total) {
    throw ConfigError(fmt::format("max object area {} must lie in (0, {})", max_object_area, total),
                      {{"max_area", "must be positive and smaller than the frame"}});
  }
  return (1.0 - static_cast<double>(max_object_area) / static_cast<double>(total)) * 100.0;
}

ThresholdRecommendation recommend_thresholds(std::span<const GrayscaleStats> stats, int margin) {
  const auto weevil = std::find_if(stats.begin(), stats.end(), [](const auto& s) { return s.class_name == "weevil"; });
  if (weevil == stats.end()) throw ConfigError("recommendation needs a \"weevil\" class");
  double nearest = std::numeric_limits<double>::infinity();
  for (const auto& s : stats) {
    if (s.class_name != "weevil") nearest = std::min(nearest, s.mean);
  }
  if (!std::isfinite(nearest)) throw ConfigError("recommendation needs at least one non-weevil class");

  ThresholdRecommendation rec;
  rec.weevil_max = weevil->max;
  rec.nearest_other_mean = nearest;
  const int candidate = std::min(weevil->max + margin, 255);
  if (static_cast<double>(candidate) < nearest) {
    rec.t = candidate;
    rec.note = fmt::format("T = {} separates weevil max {} from nearest debris mean {:.1f}", candidate,
                           weevil->max, nearest);
  } else {
    rec.note = fmt::format("no separating threshold: weevil max {} + margin {} reaches debris mean {:.1f}",
                           weevil->max, margin, nearest);
  }
  return rec;
}

std::vector<CorpusSample> load_corpus(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw StoreError("cannot open corpus manifest " + manifest.string());
  const auto base = manifest.parent_path();
  std::vector<CorpusSample> corpus;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& ex) {
      throw StoreError(fmt::format("{}:{}: {}", manifest.string(), line_no, ex.what()));
    }
    auto resolve = [&](const char* key) {
      std::filesystem::path p = j.at(key).get<std::string>();
      return p.is_absolute() ? p : base / p;
    };
    GrayImage image = decode_gray(read_file(resolve("image_path")));
    const GrayImage mask_gray = decode_gray(read_file(resolve("mask_path")));
    std::vector<std::uint8_t> mask_px(mask_gray.size());
    const auto src = mask_gray.pixels();
    for (std::size_t i = 0; i < src.size(); ++i) mask_px[i] = src[i] >= 128 ? kForeground : kBackground;
    corpus.push_back({std::move(image), BinaryImage(mask_gray.width(), mask_gray.height(), std::move(mask_px)),
                      j.at("class").get<std::string>()});
  }
  return corpus;
}

std::vector<CorpusSample> synthetic_corpus(const SyntheticCorpusOptions& options) {
  std::mt19937_64 rng(options.seed);
  auto uniform = [&](int lo, int hi) { return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1)); };

  std::vector<CorpusSample> corpus;
  for (int i = 0; i < options.samples_per_class; ++i) {
    for (const auto& band : kBands) {
      GrayImage image(options.width, options.height);
      BinaryImage mask(options.width, options.height);
      const double cx = options.width / 2.0;
      const double cy = options.height / 2.0;
      const double rx = options.width * (0.2 + 0.15 * static_cast<double>(uniform(0, 100)) / 100.0);
      const double ry = options.height * (0.15 + 0.15 * static_cast<double>(uniform(0, 100)) / 100.0);
      const int base = uniform(band.lo + 8, band.hi - 8);
      for (int y = 0; y < options.height; ++y) {
        for (int x = 0; x < options.width; ++x) {
          const double dx = (x + 0.5 - cx) / rx;
          const double dy = (y + 0.5 - cy) / ry;
          if (dx * dx + dy * dy <= 1.0) {
            image.at(x, y) = static_cast<std::uint8_t>(std::clamp(base + uniform(-8, 8), band.lo, band.hi));
            mask.set(x, y, true);
          } else {
            image.at(x, y) = static_cast<std::uint8_t>(uniform(0, 255));
          }
        }
      }
      corpus.push_back({std::move(image), std::move(mask), band.name});
    }
  }
  return corpus;
}

std::filesystem::path write_corpus(std::span<const CorpusSample> corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto manifest = dir / "manifest.jsonl";
  std::ofstream out(manifest, std::ios::trunc);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto image_name = fmt::format("{:04d}_{}.pgm", i, corpus[i].class_name);
    const auto mask_name = fmt::format("{:04d}_{}_mask.pgm", i, corpus[i].class_name);
    write_file_atomic(dir / image_name, encode_pgm(corpus[i].image));
    write_file_atomic(dir / mask_name, encode_pgm(corpus[i].mask.as_gray()));
    nlohmann::ordered_json j;
    j["image_path"] = image_name;
    j["mask_path"] = mask_name;
    j["class"] = corpus[i].class_name;
    out << j.dump() << '\n';
  }
  if (!out) throw StoreError("cannot write " + manifest.string());
  return manifest;
}

}  // namespace trapsight
