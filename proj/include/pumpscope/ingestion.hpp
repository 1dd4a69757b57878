#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "pumpscope/core.hpp"
#include "pumpscope/error.hpp"
#include "pumpscope/time.hpp"

namespace pumpscope {

inline constexpr std::string_view kCandleHeader = "timestamp,open,high,low,close,quantity";
inline constexpr std::string_view kManifestHeader = "symbol,target_date";
inline constexpr int kSignificantDigits = 12;

struct EventManifest {
  std::vector<EventKey> entries;
};

// ---------------------------------------------------------------------------
// Decimal formatting. Reals are written with at most 12 significant digits;
// quantize() maps a double to the value a write/read cycle would produce.

inline std::string format_decimal(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, kSignificantDigits);
  return std::string(buf, ptr);
}

inline double quantize(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, kSignificantDigits);
  double out = 0;
  std::from_chars(buf, ptr, out);
  return out;
}

// ---------------------------------------------------------------------------
// File helpers

inline std::string read_file(const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::string data;
  char buf[1 << 16];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) data.append(buf, n);
  bool bad = std::ferror(f) != 0;
  std::fclose(f);
  if (bad) throw Error(ErrorKind::Io, "read error on " + path.string());
  return data;
}

// Writes via a sibling temp file and rename, so readers never see a partial file.
inline void atomic_write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorKind::Io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::Io, "rename to " + path.string() + " failed: " + ec.message());
}

namespace detail {

// Splits CSV text into lines, stripping a trailing CR. Blank lines are skipped.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    if (!line.empty()) fn(line, line_no);
    pos = nl + 1;
  }
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

inline std::size_t split_fields(std::string_view line, std::span<std::string_view> out) {
  std::size_t n = 0;
  std::size_t pos = 0;
  while (true) {
    std::size_t comma = line.find(',', pos);
    std::string_view field = line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    if (n < out.size()) out[n] = trim(field);
    ++n;
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return n;
}

inline Error parse_error(std::string_view source, std::size_t line, const std::string& msg) {
  return Error(ErrorKind::Parse, std::string(source) + ":" + std::to_string(line) + ": " + msg);
}

inline bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

// Integer epoch milliseconds or ISO-8601.
inline std::optional<Instant> parse_timestamp(std::string_view s) {
  std::int64_t ms = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), ms);
  if (ec == std::errc{} && ptr == s.data() + s.size() && !s.empty()) return from_epoch_ms(ms);
  return parse_iso8601(s);
}

inline void check_header(std::string_view header, std::string_view expected, std::string_view source) {
  std::string normalized;
  std::array<std::string_view, 16> fields{};
  std::size_t n = split_fields(header, fields);
  for (std::size_t i = 0; i < std::min(n, fields.size()); ++i) {
    if (i) normalized += ',';
    normalized += fields[i];
  }
  if (normalized != expected) {
    throw parse_error(source, 1, "expected header '" + std::string(expected) + "', got '" + std::string(header) + "'");
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Manifest

inline EventManifest parse_manifest(std::string_view text, std::string_view source = "<manifest>") {
  EventManifest manifest;
  bool header_seen = false;
  std::map<EventKey, std::size_t> first_line;
  std::vector<std::string> duplicates;
  detail::for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    if (!header_seen) {
      detail::check_header(line, kManifestHeader, source);
      header_seen = true;
      return;
    }
    std::array<std::string_view, 2> f{};
    if (detail::split_fields(line, f) != 2) throw detail::parse_error(source, line_no, "expected 2 fields");
    if (f[0].empty()) throw detail::parse_error(source, line_no, "empty symbol");
    auto ts = parse_iso8601(f[1]);
    if (!ts) throw detail::parse_error(source, line_no, "bad target_date '" + std::string(f[1]) + "'");
    EventKey key{std::string(f[0]), floor_minute(*ts)};
    auto [it, inserted] = first_line.emplace(key, line_no);
    if (!inserted) {
      duplicates.push_back(key.symbol + "@" + format_iso8601(key.target_date) + " (lines " +
                           std::to_string(it->second) + " and " + std::to_string(line_no) + ")");
      return;
    }
    manifest.entries.push_back(std::move(key));
  });
  if (!header_seen) throw detail::parse_error(source, 1, "missing header");
  if (!duplicates.empty()) {
    std::string msg = std::string(source) + ": duplicate events:";
    for (const auto& d : duplicates) msg += " " + d;
    throw Error(ErrorKind::Duplicate, msg);
  }
  return manifest;
}

inline EventManifest load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_file(path), path.string());
}

inline std::string manifest_to_csv(const EventManifest& m) {
  std::string out(kManifestHeader);
  out += '\n';
  for (const auto& e : m.entries) {
    out += e.symbol;
    out += ',';
    out += format_iso8601(e.target_date);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Candles

// Sorts ascending; rejects duplicate timestamps and invalid candles.
inline void normalize_candles(std::vector<Candle>& candles, std::string_view source) {
  std::sort(candles.begin(), candles.end(),
            [](const Candle& a, const Candle& b) { return a.timestamp < b.timestamp; });
  auto dup = std::adjacent_find(candles.begin(), candles.end(),
                                [](const Candle& a, const Candle& b) { return a.timestamp == b.timestamp; });
  if (dup != candles.end()) {
    throw Error(ErrorKind::Duplicate, std::string(source) + ": duplicate timestamp " + format_iso8601(dup->timestamp));
  }
}

inline std::vector<Candle> parse_candles_csv(std::string_view text, std::string_view source = "<candles>") {
  std::vector<Candle> candles;
  candles.reserve(text.size() / 64);
  bool header_seen = false;
  detail::for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    if (!header_seen) {
      detail::check_header(line, kCandleHeader, source);
      header_seen = true;
      return;
    }
    std::array<std::string_view, 6> f{};
    if (detail::split_fields(line, f) != 6) throw detail::parse_error(source, line_no, "expected 6 fields");
    Candle c;
    auto ts = detail::parse_timestamp(f[0]);
    if (!ts) throw detail::parse_error(source, line_no, "bad timestamp '" + std::string(f[0]) + "'");
    c.timestamp = *ts;
    double* dst[5] = {&c.open, &c.high, &c.low, &c.close, &c.quantity};
    for (int i = 0; i < 5; ++i) {
      if (!detail::parse_double(f[static_cast<std::size_t>(i) + 1], *dst[i])) {
        throw detail::parse_error(source, line_no, "bad number '" + std::string(f[static_cast<std::size_t>(i) + 1]) + "'");
      }
    }
    if (auto v = validate_candle(c); !v) {
      throw Error(ErrorKind::Validation,
                  std::string(source) + ":" + std::to_string(line_no) + ": " + to_string(*v.violated));
    }
    candles.push_back(c);
  });
  if (!header_seen) throw detail::parse_error(source, 1, "missing header");
  normalize_candles(candles, source);
  return candles;
}

inline std::vector<Candle> load_candles_csv(const std::filesystem::path& path) {
  return parse_candles_csv(read_file(path), path.string());
}

inline void append_candle_row(std::string& out, const Candle& c) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, to_epoch_ms(c.timestamp));
  out.append(buf, p);
  for (double x : {c.open, c.high, c.low, c.close, c.quantity}) {
    out += ',';
    auto [q, ec2] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, kSignificantDigits);
    out.append(buf, q);
  }
  out += '\n';
}

// Epoch-ms timestamps; reals at 12 significant digits.
inline std::string candles_to_csv(std::span<const Candle> candles) {
  std::string out(kCandleHeader);
  out += '\n';
  out.reserve(candles.size() * 72 + out.size());
  for (const Candle& c : candles) append_candle_row(out, c);
  return out;
}

inline void write_candles_csv(const std::filesystem::path& path, std::span<const Candle> candles) {
  atomic_write_file(path, candles_to_csv(candles));
}

// Candles with timestamp in [target - 4 days, target + 2 days], both ends inclusive.
inline EventWindow slice_window(std::span<const Candle> candles, const EventKey& key) {
  Instant lo = window_start(key);
  Instant hi = window_end(key);
  auto first = std::lower_bound(candles.begin(), candles.end(), lo,
                                [](const Candle& c, Instant t) { return c.timestamp < t; });
  auto last = std::upper_bound(first, candles.end(), hi,
                               [](Instant t, const Candle& c) { return t < c.timestamp; });
  return EventWindow(key, std::vector<Candle>(first, last));
}

// Per-event candle file name inside a data directory.
inline std::string event_file_name(const EventKey& key) {
  std::string sym;
  for (char ch : key.symbol) {
    bool safe = (ch >= 'A' && ch <= 'Z') || (ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9') || ch == '_' ||
                ch == '-' || ch == '.';
    sym += safe ? ch : '_';
  }
  return sym + "__" + format_compact(key.target_date) + ".csv";
}

}  // namespace pumpscope
