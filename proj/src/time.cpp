#include "trapsight/time.hpp"

#include <charconv>
#include <fmt/format.h>

namespace trapsight {
namespace {

using namespace std::chrono;

bool read_int(std::string_view text, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > text.size()) return false;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (text[i] < '0' || text[i] > '9') return false;
  }
  const auto* first = text.data() + pos;
  return std::from_chars(first, first + len, out).ec == std::errc{};
}

bool expect(std::string_view text, std::size_t pos, char c) { return pos < text.size() && text[pos] == c; }

}  // namespace

std::string format_instant(Instant t) {
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss tod{t - day};
  return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}.{:03d}Z", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), tod.hours().count(),
                     tod.minutes().count(), tod.seconds().count(), tod.subseconds().count());
}

std::optional<Instant> parse_instant(std::string_view text) {
  int y = 0, mo = 0, d = 0;
  if (!read_int(text, 0, 4, y) || !expect(text, 4, '-') || !read_int(text, 5, 2, mo) || !expect(text, 7, '-') ||
      !read_int(text, 8, 2, d)) {
    return std::nullopt;
  }
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  Instant base = time_point_cast<milliseconds>(sys_days{ymd});
  if (text.size() == 10) return base;

  int hh = 0, mm = 0, ss = 0;
  if (!(expect(text, 10, 'T') || expect(text, 10, ' ')) || !read_int(text, 11, 2, hh) || !expect(text, 13, ':') ||
      !read_int(text, 14, 2, mm) || !expect(text, 16, ':') || !read_int(text, 17, 2, ss)) {
    return std::nullopt;
  }
  if (hh > 23 || mm > 59 || ss > 59) return std::nullopt;
  std::size_t pos = 19;
  int millis = 0;
  if (expect(text, pos, '.')) {
    ++pos;
    int digits = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      if (digits < 3) millis = millis * 10 + (text[pos] - '0');
      ++digits;
      ++pos;
    }
    if (digits == 0) return std::nullopt;
    for (int i = digits; i < 3; ++i) millis *= 10;
  }
  minutes offset{0};
  if (expect(text, pos, 'Z')) {
    ++pos;
  } else if (expect(text, pos, '+') || expect(text, pos, '-')) {
    const int sign = text[pos] == '-' ? -1 : 1;
    int oh = 0, om = 0;
    if (!read_int(text, pos + 1, 2, oh) || !expect(text, pos + 3, ':') || !read_int(text, pos + 4, 2, om)) {
      return std::nullopt;
    }
    offset = minutes{sign * (oh * 60 + om)};
    pos += 6;
  } else {
    return std::nullopt;
  }
  if (pos != text.size()) return std::nullopt;
  return base + hours{hh} + minutes{mm} + seconds{ss} + milliseconds{millis} - offset;
}

std::optional<YearMonth> parse_year_month(std::string_view text) {
  int y = 0, m = 0;
  if (text.size() != 7 || !read_int(text, 0, 4, y) || !expect(text, 4, '-') || !read_int(text, 5, 2, m)) {
    return std::nullopt;
  }
  if (m < 1 || m > 12) return std::nullopt;
  return YearMonth{y, static_cast<unsigned>(m)};
}

std::string format_year_month(YearMonth ym) { return fmt::format("{:04d}-{:02d}", ym.year, ym.month); }

std::string utc_date(Instant t) {
  const year_month_day ymd{floor<days>(t)};
  return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                     static_cast<unsigned>(ymd.day()));
}

}  // namespace trapsight
