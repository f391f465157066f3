#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace trapsight {

// All timestamps are UTC with millisecond resolution.
using Instant = std::chrono::sys_time<std::chrono::milliseconds>;

struct YearMonth {
  int year = 1970;
  unsigned month = 1;  // 1..12

  friend bool operator==(const YearMonth&, const YearMonth&) = default;
};

// "2024-06-15T08:30:00.000Z"
std::string format_instant(Instant t);

// Accepts "YYYY-MM-DDTHH:MM:SS[.fff](Z|+HH:MM|-HH:MM)" and a bare
// "YYYY-MM-DD" (midnight UTC). Returns nullopt on anything else.
std::optional<Instant> parse_instant(std::string_view text);

// "YYYY-MM"; nullopt if malformed or month out of range.
std::optional<YearMonth> parse_year_month(std::string_view text);
std::string format_year_month(YearMonth ym);

// "YYYY-MM-DD" of the UTC day containing t.
std::string utc_date(Instant t);

}  // namespace trapsight
