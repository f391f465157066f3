#include <gtest/gtest.h>

#include <random>
#include <string>

#include "support/scenes.hpp"
#include "trapsight/errors.hpp"
#include "trapsight/image_io.hpp"
#include "trapsight/imaging.hpp"

using namespace trapsight;

namespace {

GrayImage noise_gray(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h);
  for (auto& p : px) p = static_cast<std::uint8_t>(rng());
  return GrayImage(w, h, px);
}

ColorImage noise_color(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ColorImage img(w, h);
  for (auto& p : img.pixels()) p = Rgb{static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng()),
                                       static_cast<std::uint8_t>(rng())};
  return img;
}

Bytes bytes_of(const std::string& s) { return Bytes(s.begin(), s.end()); }

}  // namespace

TEST(ImageIo, PgmRoundTrip) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto img = noise_gray(13 + static_cast<int>(seed), 7, seed);
    auto enc = encode_pgm(img);
    EXPECT_EQ(detect_format(enc), ImageFormat::pgm);
    EXPECT_EQ(decode_gray(enc), img);
  }
}

TEST(ImageIo, PpmRoundTrip) {
  auto img = noise_color(9, 11, 4);
  auto enc = encode_ppm(img);
  EXPECT_EQ(detect_format(enc), ImageFormat::ppm);
  EXPECT_EQ(decode_color(enc), img);
  EXPECT_EQ(decode_gray(enc), to_grayscale(img));
}

TEST(ImageIo, PngRoundTrip) {
  auto gray = noise_gray(21, 5, 8);
  auto enc = encode_png(gray);
  EXPECT_EQ(detect_format(enc), ImageFormat::png);
  EXPECT_EQ(decode_gray(enc), gray);

  auto color = noise_color(6, 17, 9);
  EXPECT_EQ(decode_color(encode_png(color)), color);
}

TEST(ImageIo, PgmHeaderWithComment) {
  auto bytes = bytes_of("P5\n# scanner\n2 1\n255\n");
  bytes.push_back(10);
  bytes.push_back(250);
  auto img = decode_gray(bytes);
  EXPECT_EQ(img.width(), 2);
  EXPECT_EQ(img.at(0, 0), 10);
  EXPECT_EQ(img.at(1, 0), 250);
}

TEST(ImageIo, EncodingIsDeterministic) {
  auto img = noise_gray(30, 30, 2);
  EXPECT_EQ(encode_pgm(img), encode_pgm(img));
  EXPECT_EQ(encode_png(img), encode_png(img));
}

TEST(ImageIo, MalformedInputsThrow) {
  EXPECT_THROW(detect_format(Bytes{}), DecodeError);
  EXPECT_THROW(decode_gray(bytes_of("hello world")), DecodeError);
  EXPECT_THROW(decode_gray(bytes_of("P5\n2 2\n255\n\x01")), DecodeError);  // truncated
  EXPECT_THROW(decode_gray(bytes_of("P5\n2 2\n65535\n")), DecodeError);
  EXPECT_THROW(decode_gray(bytes_of("P5\n0 2\n255\n")), DecodeError);
  auto png = encode_png(noise_gray(8, 8, 1));
  png.resize(png.size() / 2);
  EXPECT_THROW(decode_gray(png), DecodeError);
}

TEST(ImageIo, ContentTypes) {
  EXPECT_EQ(content_type(ImageFormat::png), "image/png");
  EXPECT_EQ(content_type(ImageFormat::pgm), "image/x-portable-graymap");
  EXPECT_EQ(file_extension(ImageFormat::ppm), "ppm");
}

TEST(ImageIo, AtomicWriteReplaces) {
  trapsight::testing::TempDir dir;
  const auto p = dir / "frame.pgm";
  write_file_atomic(p, bytes_of("first"));
  write_file_atomic(p, bytes_of("second"));
  EXPECT_EQ(read_file(p), bytes_of("second"));
  EXPECT_THROW(read_file(dir / "missing"), Error);
}
