#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "trapsight/image.hpp"

namespace trapsight {

using Bytes = std::vector<std::uint8_t>;

enum class ImageFormat { pgm, ppm, png };

// Sniffs the magic number. Throws DecodeError if unrecognised.
ImageFormat detect_format(std::span<const std::uint8_t> bytes);
std::string_view content_type(ImageFormat format);
std::string_view file_extension(ImageFormat format);

// Binary PGM (P5) and PPM (P6) with maxval 255, and 8-bit PNG of any
// colour type. Throws DecodeError on malformed input.
ColorImage decode_color(std::span<const std::uint8_t> bytes);
GrayImage decode_gray(std::span<const std::uint8_t> bytes);

Bytes encode_pgm(const GrayImage& img);
Bytes encode_ppm(const ColorImage& img);
Bytes encode_png(const GrayImage& img);
Bytes encode_png(const ColorImage& img);

Bytes read_file(const std::filesystem::path& path);
// Writes to a sibling temp file and renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace trapsight
