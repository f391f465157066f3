#include "trapsight/image_io.hpp"

#include <png.h>

#include <cctype>
#include <cstring>
#include <fstream>
#include <string>

#include "trapsight/errors.hpp"
#include "trapsight/imaging.hpp"

namespace trapsight {
namespace {

constexpr std::uint8_t kPngMagic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

// Netpbm header: magic, width, height, maxval, separated by whitespace and
// optional '#' comments, followed by exactly one whitespace byte.
struct NetpbmHeader {
  int width = 0;
  int height = 0;
  std::size_t data_offset = 0;
};

NetpbmHeader parse_netpbm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 2;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_number = [&](const char* what) {
    skip_space();
    long value = 0;
    std::size_t digits = 0;
    while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
      value = value * 10 + (bytes[pos] - '0');
      if (value > 1'000'000) throw DecodeError(std::string("netpbm: ") + what + " too large");
      ++pos;
      ++digits;
    }
    if (digits == 0) throw DecodeError(std::string("netpbm: missing ") + what);
    return static_cast<int>(value);
  };
  NetpbmHeader h;
  h.width = read_number("width");
  h.height = read_number("height");
  const int maxval = read_number("maxval");
  if (maxval != 255) throw DecodeError("netpbm: only maxval 255 is supported");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw DecodeError("netpbm: malformed header");
  h.data_offset = pos + 1;
  if (h.width < 1 || h.height < 1) throw DecodeError("netpbm: empty image");
  return h;
}

GrayImage decode_pgm(std::span<const std::uint8_t> bytes) {
  const auto h = parse_netpbm(bytes);
  const std::size_t n = static_cast<std::size_t>(h.width) * static_cast<std::size_t>(h.height);
  if (bytes.size() - h.data_offset < n) throw DecodeError("pgm: truncated pixel data");
  std::vector<std::uint8_t> px(bytes.begin() + static_cast<std::ptrdiff_t>(h.data_offset),
                               bytes.begin() + static_cast<std::ptrdiff_t>(h.data_offset + n));
  return GrayImage(h.width, h.height, std::move(px));
}

ColorImage decode_ppm(std::span<const std::uint8_t> bytes) {
  const auto h = parse_netpbm(bytes);
  const std::size_t n = static_cast<std::size_t>(h.width) * static_cast<std::size_t>(h.height);
  if (bytes.size() - h.data_offset < 3 * n) throw DecodeError("ppm: truncated pixel data");
  std::vector<Rgb> px(n);
  const std::uint8_t* src = bytes.data() + h.data_offset;
  for (std::size_t i = 0; i < n; ++i) px[i] = {src[3 * i], src[3 * i + 1], src[3 * i + 2]};
  return ColorImage(h.width, h.height, std::move(px));
}

// libpng's simplified API handles every colour type and bit depth.
ColorImage decode_png(std::span<const std::uint8_t> bytes) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw DecodeError(std::string("png: ") + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  if (image.width < 1 || image.height < 1 || image.width > 1'000'000 || image.height > 1'000'000) {
    png_image_free(&image);
    throw DecodeError("png: unsupported dimensions");
  }
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw DecodeError("png: " + msg);
  }
  std::vector<Rgb> px(static_cast<std::size_t>(image.width) * image.height);
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = {buf[3 * i], buf[3 * i + 1], buf[3 * i + 2]};
  return ColorImage(static_cast<int>(image.width), static_cast<int>(image.height), std::move(px));
}

Bytes netpbm_header(const char* magic, int w, int h) {
  const std::string head = std::string(magic) + "\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  return Bytes(head.begin(), head.end());
}

Bytes encode_png_raw(const void* data, int w, int h, png_uint_32 format) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(w);
  image.height = static_cast<png_uint_32>(h);
  image.format = format;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, data, 0, nullptr)) {
    throw Error(std::string("png encode: ") + image.message);
  }
  Bytes out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, data, 0, nullptr)) {
    throw Error(std::string("png encode: ") + image.message);
  }
  out.resize(size);
  return out;
}

}  // namespace

ImageFormat detect_format(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return ImageFormat::pgm;
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') return ImageFormat::ppm;
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngMagic, 8) == 0) return ImageFormat::png;
  throw DecodeError("unrecognised image encoding");
}

std::string_view content_type(ImageFormat format) {
  switch (format) {
    case ImageFormat::pgm: return "image/x-portable-graymap";
    case ImageFormat::ppm: return "image/x-portable-pixmap";
    case ImageFormat::png: return "image/png";
  }
  return "application/octet-stream";
}

std::string_view file_extension(ImageFormat format) {
  switch (format) {
    case ImageFormat::pgm: return "pgm";
    case ImageFormat::ppm: return "ppm";
    case ImageFormat::png: return "png";
  }
  return "bin";
}

ColorImage decode_color(std::span<const std::uint8_t> bytes) {
  switch (detect_format(bytes)) {
    case ImageFormat::pgm: {
      const GrayImage g = decode_pgm(bytes);
      std::vector<Rgb> px(g.size());
      const auto src = g.pixels();
      for (std::size_t i = 0; i < px.size(); ++i) px[i] = {src[i], src[i], src[i]};
      return ColorImage(g.width(), g.height(), std::move(px));
    }
    case ImageFormat::ppm: return decode_ppm(bytes);
    case ImageFormat::png: return decode_png(bytes);
  }
  throw DecodeError("unrecognised image encoding");
}

GrayImage decode_gray(std::span<const std::uint8_t> bytes) {
  switch (detect_format(bytes)) {
    case ImageFormat::pgm: return decode_pgm(bytes);
    case ImageFormat::ppm: return to_grayscale(decode_ppm(bytes));
    case ImageFormat::png: return to_grayscale(decode_png(bytes));
  }
  throw DecodeError("unrecognised image encoding");
}

Bytes encode_pgm(const GrayImage& img) {
  Bytes out = netpbm_header("P5", img.width(), img.height());
  const auto px = img.pixels();
  out.insert(out.end(), px.begin(), px.end());
  return out;
}

Bytes encode_ppm(const ColorImage& img) {
  Bytes out = netpbm_header("P6", img.width(), img.height());
  out.reserve(out.size() + 3 * img.size());
  for (const Rgb& p : img.pixels()) {
    out.push_back(p.r);
    out.push_back(p.g);
    out.push_back(p.b);
  }
  return out;
}

Bytes encode_png(const GrayImage& img) {
  return encode_png_raw(img.pixels().data(), img.width(), img.height(), PNG_FORMAT_GRAY);
}

Bytes encode_png(const ColorImage& img) {
  static_assert(sizeof(Rgb) == 3);
  return encode_png_raw(img.pixels().data(), img.width(), img.height(), PNG_FORMAT_RGB);
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StoreError("cannot open " + path.string());
  Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw StoreError("read failed: " + path.string());
  return data;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw StoreError("cannot create " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw StoreError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw StoreError("rename " + tmp.string() + ": " + ec.message());
}

}  // namespace trapsight
