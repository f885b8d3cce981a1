#pragma once

#include <array>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <string>
#include <string_view>

#include "citetrend/errors.hpp"

namespace citetrend {

using Date = std::chrono::sys_days;
using Timestamp = std::chrono::sys_seconds;

namespace detail {

inline bool parse_fixed_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  for (std::size_t i = pos; i < pos + len; ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  auto res = std::from_chars(s.data() + pos, s.data() + pos + len, out);
  return res.ec == std::errc{};
}

inline Date make_date(int y, int m, int d, std::string_view raw) {
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                  std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw ParseError("invalid calendar date: '" + std::string(raw) + "'");
  return Date{ymd};
}

}  // namespace detail

/// Parses "YYYY-MM-DD".
inline Date parse_date(std::string_view s) {
  int y = 0, m = 0, d = 0;
  if (s.size() != 10 || s[4] != '-' || s[7] != '-' || !detail::parse_fixed_int(s, 0, 4, y) ||
      !detail::parse_fixed_int(s, 5, 2, m) || !detail::parse_fixed_int(s, 8, 2, d))
    throw ParseError("expected date YYYY-MM-DD, got '" + std::string(s) + "'");
  return detail::make_date(y, m, d, s);
}

/// Parses RFC 3339 timestamps as emitted by Atom feeds: "YYYY-MM-DDTHH:MM:SS" followed by
/// "Z" or a "+HH:MM"/"-HH:MM" offset. Fractional seconds are truncated.
inline Timestamp parse_timestamp(std::string_view s) {
  auto fail = [&]() -> Timestamp {
    throw ParseError("expected timestamp YYYY-MM-DDTHH:MM:SSZ, got '" + std::string(s) + "'");
  };
  if (s.size() < 20 || (s[10] != 'T' && s[10] != 't' && s[10] != ' ') || s[13] != ':' || s[16] != ':')
    return fail();
  int hh = 0, mm = 0, ss = 0;
  if (!detail::parse_fixed_int(s, 11, 2, hh) || !detail::parse_fixed_int(s, 14, 2, mm) ||
      !detail::parse_fixed_int(s, 17, 2, ss) || hh > 23 || mm > 59 || ss > 60)
    return fail();
  Date day = parse_date(s.substr(0, 10));
  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  std::chrono::seconds offset{0};
  std::string_view zone = s.substr(pos);
  if (zone == "Z" || zone == "z") {
  } else if (zone.size() == 6 && (zone[0] == '+' || zone[0] == '-') && zone[3] == ':') {
    int oh = 0, om = 0;
    if (!detail::parse_fixed_int(zone, 1, 2, oh) || !detail::parse_fixed_int(zone, 4, 2, om)) return fail();
    offset = std::chrono::hours{oh} + std::chrono::minutes{om};
    if (zone[0] == '-') offset = -offset;
  } else {
    return fail();
  }
  return Timestamp{day} + std::chrono::hours{hh} + std::chrono::minutes{mm} + std::chrono::seconds{ss} -
         offset;
}

inline std::string format_date(Date d) {
  std::chrono::year_month_day ymd{d};
  std::array<char, 16> buf{};
  std::snprintf(buf.data(), buf.size(), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf.data();
}

/// "MM-DD", the compact week-label form used in ranking tables.
inline std::string format_month_day(Date d) {
  std::chrono::year_month_day ymd{d};
  std::array<char, 8> buf{};
  std::snprintf(buf.data(), buf.size(), "%02u-%02u", static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf.data();
}

inline std::string format_timestamp(Timestamp t) {
  auto day = std::chrono::floor<std::chrono::days>(t);
  std::chrono::hh_mm_ss hms{t - day};
  std::array<char, 16> buf{};
  std::snprintf(buf.data(), buf.size(), "T%02d:%02d:%02dZ", static_cast<int>(hms.hours().count()),
                static_cast<int>(hms.minutes().count()), static_cast<int>(hms.seconds().count()));
  return format_date(Date{day}) + buf.data();
}

inline Date utc_date(Timestamp t) { return std::chrono::floor<std::chrono::days>(t); }

inline Timestamp now_utc() {
  return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
}

/// Monday-first ordering; the seven week splits are enumerated in this order.
inline constexpr std::array<std::chrono::weekday, 7> kWeekdays = {
    std::chrono::Monday, std::chrono::Tuesday,  std::chrono::Wednesday, std::chrono::Thursday,
    std::chrono::Friday, std::chrono::Saturday, std::chrono::Sunday};

inline std::string weekday_name(std::chrono::weekday w) {
  static constexpr std::array<const char*, 7> names = {"sun", "mon", "tue", "wed", "thu", "fri", "sat"};
  return names[w.c_encoding()];
}

/// Accepts "sun", "Sunday", "SUN", ...
inline std::chrono::weekday parse_weekday(std::string_view s) {
  std::string lower;
  for (char c : s) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  static constexpr std::array<std::string_view, 7> full = {"sunday",   "monday", "tuesday", "wednesday",
                                                            "thursday", "friday", "saturday"};
  for (unsigned i = 0; i < 7; ++i) {
    if (lower == full[i] || (lower.size() == 3 && full[i].substr(0, 3) == lower))
      return std::chrono::weekday{i};
  }
  throw ValidationError("unknown weekday '" + std::string(s) + "'");
}

}  // namespace citetrend
