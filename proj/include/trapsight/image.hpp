#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace trapsight {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

// Row-major raster with a fixed, non-empty shape. Shape violations throw
// DimensionError at construction.
template <typename Pixel>
class Raster {
 public:
  using pixel_type = Pixel;

  Raster(int width, int height, Pixel fill = Pixel{});
  Raster(int width, int height, std::vector<Pixel> pixels);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return pixels_.size(); }

  const Pixel& at(int x, int y) const { return pixels_[index(x, y)]; }
  Pixel& at(int x, int y) { return pixels_[index(x, y)]; }

  std::span<const Pixel> pixels() const noexcept { return pixels_; }
  std::span<Pixel> pixels() noexcept { return pixels_; }
  std::span<const Pixel> row(int y) const noexcept {
    return std::span<const Pixel>(pixels_).subspan(static_cast<std::size_t>(y) * width_, width_);
  }

  bool same_shape(const auto& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_;
  int height_;
  std::vector<Pixel> pixels_;
};

using ColorImage = Raster<Rgb>;
using GrayImage = Raster<std::uint8_t>;

inline constexpr std::uint8_t kForeground = 255;
inline constexpr std::uint8_t kBackground = 0;

class BinaryImage;

namespace detail {
// Wraps a raster the caller has already restricted to {0, 255}.
BinaryImage make_binary_unchecked(GrayImage raster);
}  // namespace detail

// Thresholded frame. Every pixel is kForeground or kBackground; the class
// only exposes mutation through set() so the invariant cannot be broken.
class BinaryImage {
 public:
  BinaryImage(int width, int height);
  // Throws DimensionError on a bad shape, std::invalid_argument if any
  // pixel is outside {0, 255}.
  BinaryImage(int width, int height, std::vector<std::uint8_t> pixels);

  int width() const noexcept { return raster_.width(); }
  int height() const noexcept { return raster_.height(); }
  std::size_t size() const noexcept { return raster_.size(); }

  bool foreground(int x, int y) const { return raster_.at(x, y) == kForeground; }
  std::uint8_t at(int x, int y) const { return raster_.at(x, y); }
  void set(int x, int y, bool fg) { raster_.at(x, y) = fg ? kForeground : kBackground; }

  std::span<const std::uint8_t> pixels() const noexcept { return raster_.pixels(); }
  std::span<const std::uint8_t> row(int y) const noexcept { return raster_.row(y); }

  std::size_t foreground_count() const noexcept;

  bool same_shape(const auto& other) const noexcept { return raster_.same_shape(other); }

  // View as an ordinary gray raster, e.g. for encoding.
  const GrayImage& as_gray() const noexcept { return raster_; }

  friend bool operator==(const BinaryImage&, const BinaryImage&) = default;

 private:
  struct Unchecked {};
  BinaryImage(Unchecked, GrayImage raster) : raster_(std::move(raster)) {}
  friend BinaryImage detail::make_binary_unchecked(GrayImage raster);

  GrayImage raster_;
};

}  // namespace trapsight
