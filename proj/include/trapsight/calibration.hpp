#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trapsight/image.hpp"

namespace trapsight {

struct GrayscaleStats {
  std::string class_name;
  std::size_t sample_count = 0;  // images contributing to the class
  std::size_t pixel_count = 0;   // masked pixels contributing
  double mean = 0.0;
  int min = 0;
  int max = 0;
};

struct CorpusSample {
  GrayImage image;
  BinaryImage mask;  // foreground selects the pixels that belong to the object
  std::string class_name;
};

struct RejectedSample {
  std::size_t index = 0;
  std::string reason;
};

struct GrayscaleReport {
  std::vector<GrayscaleStats> classes;  // first-appearance order
  std::vector<RejectedSample> rejected;
};

// Per-class statistics over masked pixels. Samples whose mask is empty or
// mis-sized are skipped and listed in `rejected`.
GrayscaleReport grayscale_stats(std::span<const CorpusSample> corpus);

// Percentage of the frame left unchanged when an object of max_object_area
// pixels appears. Throws ConfigError unless 0 < area < width * height.
double similarity_threshold(std::int64_t max_object_area, int width, int height);

struct ThresholdRecommendation {
  std::optional<int> t;    // absent when the classes cannot be separated
  int weevil_max = 0;
  double nearest_other_mean = 0.0;
  std::string note;
};

// weevil.max + margin, which must stay below the darkest non-weevil class
// mean. Throws ConfigError if there is no "weevil" class or no other class.
ThresholdRecommendation recommend_thresholds(std::span<const GrayscaleStats> stats, int margin);

// Manifest: JSON Lines with image_path, mask_path, class. Relative paths are
// resolved against the manifest's directory.
std::vector<CorpusSample> load_corpus(const std::filesystem::path& manifest);

struct SyntheticCorpusOptions {
  int samples_per_class = 25;
  int width = 64;
  int height = 48;
  std::uint64_t seed = 1;
};

// Weevils drawn from dark gray levels, debris (leaf, soil, stone) from
// brighter bands, each over a textured background that the mask excludes.
std::vector<CorpusSample> synthetic_corpus(const SyntheticCorpusOptions& options);

// Writes images and masks as PGM plus a manifest.jsonl into `dir`.
std::filesystem::path write_corpus(std::span<const CorpusSample> corpus, const std::filesystem::path& dir);

}  // namespace trapsight
