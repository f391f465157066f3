#pragma once

// Pixel-level operations of the detection pipeline. Every function here is
// pure and safe to call concurrently.

#include <cstdint>
#include <span>
#include <vector>

#include "trapsight/image.hpp"

namespace trapsight {

// One maximal 8-connected region of foreground pixels.
struct Component {
  struct Box {
    int min_x = 0;
    int min_y = 0;
    int max_x = 0;
    int max_y = 0;

    int width() const noexcept { return max_x - min_x + 1; }
    int height() const noexcept { return max_y - min_y + 1; }
    friend bool operator==(const Box&, const Box&) = default;
  };

  int label = 0;           // dense, starting at 1
  std::int64_t area = 0;   // filled pixel count
  Box bbox;
  double centroid_x = 0.0;
  double centroid_y = 0.0;
};

// Rec. 601 luma, round half up.
GrayImage to_grayscale(const ColorImage& img);

// Pixels brighter than t become background (0); pixels at or below t
// become foreground (255). Dark insects therefore end up as foreground.
BinaryImage binary_threshold(const GrayImage& img, std::uint8_t t);

// Per-pixel |a - b|. Throws DimensionError on a shape mismatch.
GrayImage absolute_difference(const GrayImage& a, const GrayImage& b);

// Percentage of positions where a and b agree. Throws DimensionError.
double similarity_percent(const BinaryImage& a, const BinaryImage& b);

// Connected foreground regions ordered by (bbox.min_y, bbox.min_x).
std::vector<Component> label_components(const BinaryImage& img);

// Components whose area lies in [lower, upper], both ends inclusive.
// Throws ConfigError if lower > upper.
std::size_t count_weevils(std::span<const Component> components, std::int64_t lower, std::int64_t upper);

// Foreground in `current` that was background in `previous`. Throws
// DimensionError.
BinaryImage new_object_mask(const BinaryImage& previous, const BinaryImage& current);

}  // namespace trapsight
