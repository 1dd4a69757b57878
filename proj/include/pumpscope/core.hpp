#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "pumpscope/error.hpp"
#include "pumpscope/time.hpp"

namespace pumpscope {

inline constexpr double kRelTolerance = 1e-9;

inline bool approx_equal(double a, double b, double rel = kRelTolerance) {
  double scale = std::max(std::abs(a), std::abs(b));
  return std::abs(a - b) <= rel * scale || a == b;
}

// One minute of OHLCV data. Quantity is base-asset volume.
struct Candle {
  Instant timestamp;
  double open = 0;
  double high = 0;
  double low = 0;
  double close = 0;
  double quantity = 0;

  friend bool operator==(const Candle&, const Candle&) = default;
};

enum class CandleRule {
  NonPositivePrice,
  HighBelowOpenClose,
  LowAboveOpenClose,
  LowAboveHigh,
  NegativeQuantity,
  NotMinuteAligned,
};

inline const char* to_string(CandleRule r) {
  switch (r) {
    case CandleRule::NonPositivePrice: return "all prices must be > 0";
    case CandleRule::HighBelowOpenClose: return "high must be >= max(open, close)";
    case CandleRule::LowAboveOpenClose: return "low must be <= min(open, close)";
    case CandleRule::LowAboveHigh: return "low must be <= high";
    case CandleRule::NegativeQuantity: return "quantity must be >= 0";
    case CandleRule::NotMinuteAligned: return "timestamp must be minute-aligned";
  }
  return "unknown rule";
}

struct CandleValidation {
  std::optional<CandleRule> violated;

  bool ok() const { return !violated.has_value(); }
  explicit operator bool() const { return ok(); }
};

inline CandleValidation validate_candle(const Candle& c) {
  // NaN fails every comparison below, so each check is phrased to reject it.
  if (!(c.open > 0 && c.high > 0 && c.low > 0 && c.close > 0)) return {CandleRule::NonPositivePrice};
  if (!(c.low <= c.high)) return {CandleRule::LowAboveHigh};
  if (!(c.high >= std::max(c.open, c.close))) return {CandleRule::HighBelowOpenClose};
  if (!(c.low <= std::min(c.open, c.close))) return {CandleRule::LowAboveOpenClose};
  if (!(c.quantity >= 0) || std::isinf(c.quantity)) return {CandleRule::NegativeQuantity};
  if (!is_minute_aligned(c.timestamp)) return {CandleRule::NotMinuteAligned};
  return {};
}

struct EventKey {
  std::string symbol;
  Instant target_date;

  friend bool operator==(const EventKey&, const EventKey&) = default;
  friend auto operator<=>(const EventKey& a, const EventKey& b) {
    return std::tie(a.symbol, a.target_date) <=> std::tie(b.symbol, b.target_date);
  }
};

inline Instant window_start(const EventKey& key) { return key.target_date - kPreEventWindow; }
inline Instant window_end(const EventKey& key) { return key.target_date + kPostEventWindow; }

inline bool in_window(const EventKey& key, Instant t) {
  return t >= window_start(key) && t <= window_end(key);
}

// All candles of one {symbol, target_date} event inside the analysis window.
// Sorted strictly ascending; may be sparse.
class EventWindow {
 public:
  EventWindow() = default;

  EventWindow(EventKey key, std::vector<Candle> candles) : key_(std::move(key)), candles_(std::move(candles)) {
    if (key_.symbol.empty()) throw Error(ErrorKind::Validation, "event symbol must be non-empty");
    for (std::size_t i = 0; i < candles_.size(); ++i) {
      const Candle& c = candles_[i];
      if (i > 0 && !(candles_[i - 1].timestamp < c.timestamp)) {
        throw Error(ErrorKind::Validation, "window candles must be strictly ascending at " +
                                               format_iso8601(c.timestamp));
      }
      if (!in_window(key_, c.timestamp)) {
        throw Error(ErrorKind::Validation, "candle at " + format_iso8601(c.timestamp) +
                                               " lies outside the event window");
      }
    }
  }

  const EventKey& key() const { return key_; }
  Instant target_date() const { return key_.target_date; }
  std::span<const Candle> candles() const { return candles_; }
  bool empty() const { return candles_.empty(); }
  std::size_t size() const { return candles_.size(); }

  // Candles strictly before the target date.
  std::span<const Candle> pre_pump() const { return {candles_.data(), split_index()}; }

  // Candles at or after the target date.
  std::span<const Candle> post_pump() const {
    std::size_t i = split_index();
    return {candles_.data() + i, candles_.size() - i};
  }

  // Candles with timestamp in [from, to].
  std::span<const Candle> between(Instant from, Instant to) const {
    auto lo = std::lower_bound(candles_.begin(), candles_.end(), from,
                               [](const Candle& c, Instant t) { return c.timestamp < t; });
    auto hi = std::upper_bound(lo, candles_.end(), to,
                               [](Instant t, const Candle& c) { return t < c.timestamp; });
    return {candles_.data() + (lo - candles_.begin()), static_cast<std::size_t>(hi - lo)};
  }

  friend bool operator==(const EventWindow&, const EventWindow&) = default;

 private:
  std::size_t split_index() const {
    auto it = std::lower_bound(candles_.begin(), candles_.end(), key_.target_date,
                               [](const Candle& c, Instant t) { return c.timestamp < t; });
    return static_cast<std::size_t>(it - candles_.begin());
  }

  EventKey key_;
  std::vector<Candle> candles_;
};

// Detected accumulation interval; both ends present or both absent.
class AccumulationSpan {
 public:
  AccumulationSpan() = default;
  AccumulationSpan(Instant start, Instant end) : bounds_(std::pair{start, end}) {
    if (end < start) throw Error(ErrorKind::Validation, "accumulation span end precedes start");
  }

  bool present() const { return bounds_.has_value(); }
  explicit operator bool() const { return present(); }
  std::optional<Instant> start() const {
    return bounds_ ? std::optional<Instant>{bounds_->first} : std::nullopt;
  }
  std::optional<Instant> end() const {
    return bounds_ ? std::optional<Instant>{bounds_->second} : std::nullopt;
  }

  friend bool operator==(const AccumulationSpan&, const AccumulationSpan&) = default;

 private:
  std::optional<std::pair<Instant, Instant>> bounds_;
};

}  // namespace pumpscope
