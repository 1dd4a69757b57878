#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "pumpscope/core.hpp"
#include "pumpscope/error.hpp"
#include "pumpscope/ingestion.hpp"
#include "pumpscope/time.hpp"

namespace pumpscope {

inline constexpr const char* kBaseUrlEnv = "PUMPSCOPE_BASE_URL";

struct SourceConfig {
  std::string base_url = "https://api.poloniex.com";
  double requests_per_second = 5.0;
  int max_candles_per_request = 500;
  int retry_limit = 3;
  std::chrono::milliseconds timeout{10000};
  std::chrono::milliseconds initial_backoff{200};

  void validate() const {
    if (base_url.empty()) throw Error(ErrorKind::Config, "base_url must be set");
    if (!(requests_per_second > 0) || !std::isfinite(requests_per_second)) {
      throw Error(ErrorKind::Config, "requests_per_second must be > 0");
    }
    if (max_candles_per_request <= 0) throw Error(ErrorKind::Config, "max_candles_per_request must be > 0");
    if (retry_limit < 0 || retry_limit > 10) throw Error(ErrorKind::Config, "retry_limit must be in [0, 10]");
    if (timeout.count() <= 0) throw Error(ErrorKind::Config, "timeout must be positive");
  }
};

// PUMPSCOPE_BASE_URL, when set and non-empty, replaces cfg.base_url.
inline SourceConfig with_env_overrides(SourceConfig cfg) {
  if (const char* env = std::getenv(kBaseUrlEnv); env && *env) cfg.base_url = env;
  return cfg;
}

// Sliding-window request limiter. For rate r >= 1 it admits floor(r) requests per
// second; for r < 1 one request per 1/r seconds. Either way any 1-second interval
// sees at most ceil(r) requests. Safe to share between threads.
class RateLimiter {
 public:
  using Clock = std::chrono::steady_clock;

  explicit RateLimiter(double requests_per_second) {
    if (!(requests_per_second > 0)) throw Error(ErrorKind::Config, "requests_per_second must be > 0");
    if (requests_per_second >= 1) {
      capacity_ = static_cast<std::size_t>(std::floor(requests_per_second));
      window_ = std::chrono::milliseconds{1000};
    } else {
      capacity_ = 1;
      window_ = std::chrono::milliseconds{static_cast<std::int64_t>(std::ceil(1000.0 / requests_per_second))};
    }
  }

  void acquire() {
    while (true) {
      Clock::time_point wake;
      {
        std::lock_guard lock(mu_);
        auto now = Clock::now();
        while (!issued_.empty() && now - issued_.front() >= window_ + kGuard) issued_.pop_front();
        if (issued_.size() < capacity_) {
          issued_.push_back(now);
          return;
        }
        wake = issued_.front() + window_ + kGuard;
      }
      std::this_thread::sleep_until(wake);
    }
  }

 private:
  static constexpr std::chrono::milliseconds kGuard{5};

  std::mutex mu_;
  std::deque<Clock::time_point> issued_;
  std::size_t capacity_ = 1;
  std::chrono::milliseconds window_{1000};
};

// Request/response mapping for the exchange candle endpoint. All knowledge of the
// wire schema lives here.
//
// GET {base}/markets/{symbol}/candles?interval=MINUTE_1&startTime={ms}&endTime={ms}&limit={n}
// Response: JSON array; each record is an array
//   [low, high, open, close, amount, quantity, buyTakerAmount, buyTakerQuantity,
//    tradeCount, ts, weightedAverage, interval, startTime, closeTime]
// with numbers as strings or JSON numbers. `quantity` (base asset) maps to
// Candle::quantity and `startTime` to Candle::timestamp.
struct PoloniexCandleAdapter {
  static std::string path(std::string_view prefix, std::string_view symbol, std::int64_t start_ms,
                          std::int64_t end_ms_inclusive, int limit) {
    std::string p(prefix);
    p += "/markets/";
    p += symbol;
    p += "/candles?interval=MINUTE_1&startTime=" + std::to_string(start_ms) +
         "&endTime=" + std::to_string(end_ms_inclusive) + "&limit=" + std::to_string(limit);
    return p;
  }

  static std::vector<Candle> parse(std::string_view body) {
    nlohmann::json doc = nlohmann::json::parse(body, nullptr, false);
    if (doc.is_discarded() || !doc.is_array()) {
      throw Error(ErrorKind::MalformedPayload, "candle payload is not a JSON array: " + excerpt(body));
    }
    std::vector<Candle> out;
    out.reserve(doc.size());
    for (const auto& rec : doc) {
      if (!rec.is_array() || rec.size() < 13) {
        throw Error(ErrorKind::MalformedPayload, "candle record has unexpected shape: " + excerpt(rec.dump()));
      }
      Candle c;
      c.low = number(rec[0]);
      c.high = number(rec[1]);
      c.open = number(rec[2]);
      c.close = number(rec[3]);
      c.quantity = number(rec[5]);
      c.timestamp = from_epoch_ms(static_cast<std::int64_t>(number(rec[12])));
      out.push_back(c);
    }
    return out;
  }

  static nlohmann::json encode(const Candle& c) {
    auto s = [](double x) { return format_decimal(x); };
    std::int64_t ms = to_epoch_ms(c.timestamp);
    return nlohmann::json::array({s(c.low), s(c.high), s(c.open), s(c.close), s(c.quantity * c.close),
                                  s(c.quantity), "0", "0", 0, ms, s(c.close), "MINUTE_1", ms, ms + 59999});
  }

  static std::string excerpt(std::string_view body, std::size_t n = 200) {
    return std::string(body.substr(0, n)) + (body.size() > n ? "..." : "");
  }

 private:
  static double number(const nlohmann::json& v) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      double x = 0;
      const auto& s = v.get_ref<const std::string&>();
      if (detail::parse_double(s, x)) return x;
    }
    throw Error(ErrorKind::MalformedPayload, "non-numeric candle field: " + v.dump());
  }
};

namespace detail {

struct SplitUrl {
  std::string scheme_host_port;
  std::string path_prefix;
};

inline SplitUrl split_base_url(const std::string& url) {
  std::size_t scheme = url.find("://");
  std::size_t host_begin = scheme == std::string::npos ? 0 : scheme + 3;
  std::size_t slash = url.find('/', host_begin);
  if (slash == std::string::npos) return {url, ""};
  std::string prefix = url.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, slash), prefix};
}

inline bool is_transient(int status) { return status == 429 || status >= 500; }

}  // namespace detail

// GET with retries on connection failures, 429 and 5xx. Every attempt passes the limiter.
inline std::string get_with_retry(const SourceConfig& cfg, RateLimiter& limiter, const std::string& path) {
  auto url = detail::split_base_url(cfg.base_url);
  httplib::Client client(url.scheme_host_port);
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg.timeout);
  auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(cfg.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());

  std::string last_failure;
  ErrorKind last_kind = ErrorKind::Network;
  auto backoff = cfg.initial_backoff;
  for (int attempt = 0; attempt <= cfg.retry_limit; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    limiter.acquire();
    auto res = client.Get(path);
    if (!res) {
      last_kind = ErrorKind::Network;
      last_failure = "request to " + url.scheme_host_port + path + " failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 200 && res->status < 300) return res->body;
    std::string msg = "HTTP " + std::to_string(res->status) + " for " + path + ": " +
                      PoloniexCandleAdapter::excerpt(res->body);
    if (!detail::is_transient(res->status)) throw Error(ErrorKind::HttpStatus, msg);
    last_kind = ErrorKind::HttpStatus;
    last_failure = msg;
    if (res->has_header("Retry-After")) {
      auto wait = std::chrono::milliseconds{static_cast<std::int64_t>(
          1000 * std::atof(res->get_header_value("Retry-After").c_str()))};
      backoff = std::max(backoff, wait);
    }
  }
  throw Error(last_kind, last_failure + " (after " + std::to_string(cfg.retry_limit) + " retries)");
}

// All MINUTE_1 candles in [start, end), paging forward from the latest timestamp
// received. An empty page ends the scan. Output is sorted, validated and free of
// duplicate timestamps.
inline std::vector<Candle> fetch_candles(const SourceConfig& cfg, RateLimiter& limiter, std::string_view symbol,
                                         Instant start, Instant end) {
  cfg.validate();
  if (!(start < end)) throw Error(ErrorKind::Config, "fetch range must satisfy start < end");
  auto url = detail::split_base_url(cfg.base_url);
  std::vector<Candle> out;
  Instant cursor = start;
  while (cursor < end) {
    std::string path = PoloniexCandleAdapter::path(url.path_prefix, symbol, to_epoch_ms(cursor),
                                                   to_epoch_ms(end) - 1, cfg.max_candles_per_request);
    std::vector<Candle> page = PoloniexCandleAdapter::parse(get_with_retry(cfg, limiter, path));
    std::erase_if(page, [&](const Candle& c) { return c.timestamp < cursor || !(c.timestamp < end); });
    if (page.empty()) break;
    Instant latest = cursor;
    for (const Candle& c : page) {
      if (auto v = validate_candle(c); !v) {
        throw Error(ErrorKind::MalformedPayload, std::string(symbol) + " candle at " +
                                                     format_iso8601(c.timestamp) + ": " + to_string(*v.violated));
      }
      latest = std::max(latest, c.timestamp);
    }
    out.insert(out.end(), page.begin(), page.end());
    cursor = floor_minute(latest) + Minutes{1};
  }
  std::stable_sort(out.begin(), out.end(), [](const Candle& a, const Candle& b) { return a.timestamp < b.timestamp; });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const Candle& a, const Candle& b) { return a.timestamp == b.timestamp; }),
            out.end());
  return out;
}

inline std::vector<Candle> fetch_candles(const SourceConfig& cfg, std::string_view symbol, Instant start, Instant end) {
  cfg.validate();
  RateLimiter limiter(cfg.requests_per_second);
  return fetch_candles(cfg, limiter, symbol, start, end);
}

}  // namespace pumpscope
