#include "trapsight/image.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "trapsight/errors.hpp"

namespace trapsight {
namespace {

void check_shape(int width, int height) {
  if (width < 1 || height < 1) {
    throw DimensionError("image shape must be at least 1x1, got " + std::to_string(width) + "x" +
                         std::to_string(height));
  }
}

}  // namespace

template <typename Pixel>
Raster<Pixel>::Raster(int width, int height, Pixel fill) : width_(width), height_(height) {
  check_shape(width, height);
  pixels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

template <typename Pixel>
Raster<Pixel>::Raster(int width, int height, std::vector<Pixel> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  check_shape(width, height);
  if (pixels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw DimensionError("pixel count " + std::to_string(pixels_.size()) + " does not match " +
                         std::to_string(width) + "x" + std::to_string(height));
  }
}

template class Raster<Rgb>;
template class Raster<std::uint8_t>;

BinaryImage::BinaryImage(int width, int height) : raster_(width, height, kBackground) {}

BinaryImage::BinaryImage(int width, int height, std::vector<std::uint8_t> pixels)
    : raster_(width, height, std::move(pixels)) {
  const auto px = raster_.pixels();
  if (!std::all_of(px.begin(), px.end(), [](std::uint8_t v) { return v == kForeground || v == kBackground; })) {
    throw std::invalid_argument("binary image pixels must be 0 or 255");
  }
}

std::size_t BinaryImage::foreground_count() const noexcept {
  const auto px = raster_.pixels();
  return static_cast<std::size_t>(std::count(px.begin(), px.end(), kForeground));
}

namespace detail {
BinaryImage make_binary_unchecked(GrayImage raster) {
  return BinaryImage(BinaryImage::Unchecked{}, std::move(raster));
}
}  // namespace detail

}  // namespace trapsight
