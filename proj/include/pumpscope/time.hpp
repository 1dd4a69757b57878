#pragma once

#include <chrono>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace pumpscope {

// All instants are UTC, millisecond resolution.
using Instant = std::chrono::sys_time<std::chrono::milliseconds>;
using Minutes = std::chrono::minutes;

inline constexpr Minutes kPreEventWindow{4 * 24 * 60};   // 5760
inline constexpr Minutes kPostEventWindow{2 * 24 * 60};  // 2880

inline Instant from_epoch_ms(std::int64_t ms) { return Instant{std::chrono::milliseconds{ms}}; }
inline std::int64_t to_epoch_ms(Instant t) { return t.time_since_epoch().count(); }

inline bool is_minute_aligned(Instant t) { return to_epoch_ms(t) % 60000 == 0; }

inline Instant floor_minute(Instant t) { return std::chrono::floor<Minutes>(t); }

// Whole minutes from `earlier` to `later`, truncated toward zero.
inline std::int64_t minutes_between(Instant earlier, Instant later) {
  return std::chrono::duration_cast<Minutes>(later - earlier).count();
}

namespace detail {

inline bool read_digits(std::string_view s, std::size_t pos, std::size_t n, int& out) {
  if (pos + n > s.size()) return false;
  out = 0;
  for (std::size_t i = 0; i < n; ++i) {
    char c = s[pos + i];
    if (c < '0' || c > '9') return false;
    out = out * 10 + (c - '0');
  }
  return true;
}

}  // namespace detail

// Accepts YYYY-MM-DD[T| ]HH:MM[:SS[.fff...]][Z|+HH:MM|-HH:MM]. A missing zone means UTC.
inline std::optional<Instant> parse_iso8601(std::string_view s) {
  using namespace std::chrono;
  int y, mo, d, h, mi, sec = 0;
  if (!detail::read_digits(s, 0, 4, y) || s.size() < 16 || s[4] != '-' ||
      !detail::read_digits(s, 5, 2, mo) || s[7] != '-' || !detail::read_digits(s, 8, 2, d) ||
      (s[10] != 'T' && s[10] != ' ') || !detail::read_digits(s, 11, 2, h) || s[13] != ':' ||
      !detail::read_digits(s, 14, 2, mi)) {
    return std::nullopt;
  }
  std::size_t pos = 16;
  std::int64_t millis = 0;
  if (pos < s.size() && s[pos] == ':') {
    if (!detail::read_digits(s, pos + 1, 2, sec)) return std::nullopt;
    pos += 3;
    if (pos < s.size() && s[pos] == '.') {
      ++pos;
      int scale = 100;
      std::size_t start = pos;
      while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
        millis += (s[pos] - '0') * scale;
        scale /= 10;
        ++pos;
      }
      if (pos == start) return std::nullopt;
    }
  }
  int offset_min = 0;
  if (pos < s.size()) {
    if (s[pos] == 'Z' || s[pos] == 'z') {
      ++pos;
    } else if (s[pos] == '+' || s[pos] == '-') {
      int oh, om;
      if (!detail::read_digits(s, pos + 1, 2, oh) || pos + 3 >= s.size() || s[pos + 3] != ':' ||
          !detail::read_digits(s, pos + 4, 2, om)) {
        return std::nullopt;
      }
      offset_min = (oh * 60 + om) * (s[pos] == '-' ? -1 : 1);
      pos += 6;
    }
  }
  if (pos != s.size()) return std::nullopt;
  if (h > 23 || mi > 59 || sec > 60) return std::nullopt;
  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  Instant t = time_point_cast<milliseconds>(sys_days{ymd}) + hours{h} + minutes{mi} + seconds{sec} +
              milliseconds{millis} - minutes{offset_min};
  return t;
}

// YYYY-MM-DDTHH:MM:SSZ, with .mmm only when the instant is not whole-second.
inline std::string format_iso8601(Instant t) {
  using namespace std::chrono;
  auto day_point = floor<days>(t);
  year_month_day ymd{day_point};
  auto rem = t - day_point;
  auto h = duration_cast<hours>(rem);
  rem -= h;
  auto m = duration_cast<minutes>(rem);
  rem -= m;
  auto s = duration_cast<seconds>(rem);
  rem -= s;
  char buf[40];
  int n = std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                        static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                        static_cast<int>(h.count()), static_cast<int>(m.count()),
                        static_cast<int>(s.count()));
  std::string out(buf, static_cast<std::size_t>(n));
  if (rem.count() != 0) {
    std::snprintf(buf, sizeof buf, ".%03d", static_cast<int>(rem.count()));
    out += buf;
  }
  out += 'Z';
  return out;
}

// Compact form used in file names: YYYYMMDDTHHMMZ.
inline std::string format_compact(Instant t) {
  std::string iso = format_iso8601(floor_minute(t));
  std::string out;
  for (std::size_t i = 0; i < 16; ++i) {
    if (iso[i] != '-' && iso[i] != ':') out += iso[i];
  }
  return out + 'Z';
}

}  // namespace pumpscope
