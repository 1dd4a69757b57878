#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "pumpscope/core.hpp"
#include "pumpscope/error.hpp"
#include "pumpscope/ingestion.hpp"

namespace pumpscope::synth {

// SplitMix64 (Steele, Lea, Flood 2014). Fixed constants make generated corpora
// reproducible in any language:
//   state += 0x9E3779B97F4A7C15
//   z = (state ^ (state >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   return z ^ (z >> 31)
// uniform01() takes the top 53 bits; uniform_int() rejects the biased tail.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Inclusive on both ends.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    auto range = static_cast<std::uint64_t>(hi - lo) + 1;
    if (range == 0) return static_cast<std::int64_t>(next());
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return lo + static_cast<std::int64_t>(x % range);
  }

 private:
  std::uint64_t state_;
};

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Per-event stream seed, so events can be generated in any order.
inline std::uint64_t event_seed(std::uint64_t seed, const EventKey& key) {
  SplitMix64 mix(seed ^ fnv1a64(key.symbol));
  std::uint64_t a = mix.next();
  SplitMix64 mix2(a ^ static_cast<std::uint64_t>(to_epoch_ms(key.target_date)));
  return mix2.next();
}

enum class Archetype { PreAccumulated, OnTheSpot, DormantControl };

inline std::string_view to_string(Archetype a) {
  switch (a) {
    case Archetype::PreAccumulated: return "pre_accumulated";
    case Archetype::OnTheSpot: return "on_the_spot";
    case Archetype::DormantControl: return "dormant_control";
  }
  return "?";
}

inline constexpr std::int64_t kLastHour = 60;
inline constexpr std::int64_t kMaxPumpRiseMinutes = 5;
inline constexpr std::int64_t kMaxPumpFallMinutes = 30;

// Spike placement:
//  - the final spike sits within the last hour and carries last_hour_volume_fraction
//    of the insider volume (all of it when spike_count == 1);
//  - pre_accumulated: first spike exactly accumulation_span_minutes before the final
//    one and every non-final spike more than an hour out. A single spike sits
//    more than an hour out with span 0;
//  - on_the_spot: the whole span lies inside the last hour.
struct SynthConfig {
  Archetype archetype = Archetype::PreAccumulated;
  std::uint64_t seed = 0;
  double base_price = 0.01;
  double pump_multiplier = 5.0;
  std::int64_t accumulation_span_minutes = 2880;
  std::int64_t spike_count = 5;
  double insider_volume_total = 10000;
  double last_hour_volume_fraction = 0.3;
  double sparsity = 0.0;

  void validate() const {
    auto fail = [](const std::string& m) { throw Error(ErrorKind::Config, "synth config: " + m); };
    if (!(base_price > 0)) fail("base_price must be > 0");
    if (!(sparsity >= 0 && sparsity < 1)) fail("sparsity must be in [0, 1)");
    if (!(last_hour_volume_fraction >= 0 && last_hour_volume_fraction <= 1)) fail("last_hour_volume_fraction must be in [0, 1]");
    if (spike_count < 0 || accumulation_span_minutes < 0) fail("counts must be non-negative");
    if (spike_count > 0 && !(insider_volume_total > 0)) fail("insider_volume_total must be > 0");
    if (spike_count >= 2 && !(last_hour_volume_fraction > 0 && last_hour_volume_fraction < 1)) {
      fail("multiple spikes need 0 < last_hour_volume_fraction < 1");
    }
    if (spike_count <= 1 && accumulation_span_minutes != 0) fail("zero or one spike implies a span of 0");
    switch (archetype) {
      case Archetype::DormantControl:
        if (pump_multiplier != 1.0 || spike_count != 0) fail("dormant_control needs pump_multiplier 1 and no spikes");
        break;
      case Archetype::OnTheSpot:
        if (!(pump_multiplier > 1)) fail("pump_multiplier must be > 1");
        if (spike_count >= 2 && (accumulation_span_minutes < 1 || accumulation_span_minutes >= kLastHour ||
                                 accumulation_span_minutes - 1 < spike_count - 2)) {
          fail("on_the_spot spikes must fit inside the last hour");
        }
        break;
      case Archetype::PreAccumulated:
        if (!(pump_multiplier > 1)) fail("pump_multiplier must be > 1");
        if (spike_count < 1) fail("pre_accumulated needs at least one spike");
        if (spike_count >= 2) {
          auto [lo, hi] = final_spike_delay_range();
          if (lo > hi) fail("accumulation span does not fit the pre-event window with the requested spikes");
        }
        break;
    }
  }

  // Admissible delays (minutes before target) of the final spike, pre_accumulated only.
  std::pair<std::int64_t, std::int64_t> final_spike_delay_range() const {
    std::int64_t s = accumulation_span_minutes;
    std::int64_t lo = std::max({std::int64_t{1}, kLastHour + 1 - s, spike_count + kLastHour - 1 - s});
    std::int64_t hi = std::min(kLastHour, kPreEventWindow.count() - s);
    return {lo, hi};
  }
};

struct GroundTruth {
  std::optional<Instant> true_accum_start;
  std::optional<Instant> true_accum_end;
  double true_total_volume = 0;
  double true_peak_high = 0;
  std::optional<double> true_entry_price;
  std::optional<double> true_concentration_60;
};

struct GeneratedEvent {
  EventWindow window;
  GroundTruth truth;
};

namespace detail {

// Floyd's sampling of `count` distinct integers from [lo, hi].
inline std::vector<std::int64_t> distinct_sample(SplitMix64& rng, std::int64_t lo, std::int64_t hi, std::int64_t count) {
  std::set<std::int64_t> picked;
  std::int64_t n = hi - lo + 1;
  for (std::int64_t j = n - count; j < n; ++j) {
    std::int64_t t = rng.uniform_int(0, j);
    picked.insert(picked.count(lo + t) ? lo + j : lo + t);
  }
  return {picked.begin(), picked.end()};
}

struct Spike {
  std::int64_t delay;
  double quantity;
};

inline std::vector<Spike> place_spikes(const SynthConfig& cfg, SplitMix64& rng) {
  std::vector<Spike> spikes;
  const std::int64_t k = cfg.spike_count;
  const std::int64_t span = cfg.accumulation_span_minutes;
  if (k == 0) return spikes;
  if (k == 1) {
    std::int64_t d = cfg.archetype == Archetype::PreAccumulated ? rng.uniform_int(kLastHour + 1, kPreEventWindow.count())
                                                                : rng.uniform_int(1, kLastHour);
    spikes.push_back({d, quantize(cfg.insider_volume_total)});
    return spikes;
  }
  std::int64_t d_end, inner_lo;
  if (cfg.archetype == Archetype::PreAccumulated) {
    auto [lo, hi] = cfg.final_spike_delay_range();
    d_end = rng.uniform_int(lo, hi);
    inner_lo = kLastHour + 1;
  } else {
    d_end = rng.uniform_int(1, kLastHour - span);
    inner_lo = d_end + 1;
  }
  std::int64_t d_start = d_end + span;
  std::vector<std::int64_t> delays{d_end, d_start};
  for (auto d : distinct_sample(rng, inner_lo, d_start - 1, k - 2)) delays.push_back(d);
  std::sort(delays.begin(), delays.end());  // delays[0] is the final spike

  double f = cfg.last_hour_volume_fraction;
  std::vector<double> weights;
  double wsum = 0;
  for (std::size_t i = 1; i < delays.size(); ++i) {
    weights.push_back(rng.uniform(0.5, 1.5));
    wsum += weights.back();
  }
  spikes.push_back({delays[0], quantize(f * cfg.insider_volume_total)});
  for (std::size_t i = 1; i < delays.size(); ++i) {
    spikes.push_back({delays[i], quantize((1 - f) * cfg.insider_volume_total * weights[i - 1] / wsum)});
  }
  return spikes;
}

inline Candle flat_candle(Instant t, double price) { return {t, price, price, price, price, 0.0}; }

}  // namespace detail

// Builds one event window with known ground truth. The pump climbs linearly to
// base_price * pump_multiplier within 5 minutes of the target date and falls back
// to base_price within 30 more. All other minutes are flat, zero-volume candles at
// base_price, each dropped with probability `sparsity`; spike, pump and target-date
// candles are always present. Every real is pre-rounded to 12 significant digits so
// the window survives a CSV round trip unchanged.
inline GeneratedEvent generate_event(const SynthConfig& cfg, const EventKey& key) {
  cfg.validate();
  if (!is_minute_aligned(key.target_date)) throw Error(ErrorKind::Config, "target_date must be minute-aligned");
  SplitMix64 rng(event_seed(cfg.seed, key));
  const Instant target = key.target_date;
  const double base = quantize(cfg.base_price);
  const double peak = cfg.archetype == Archetype::DormantControl ? base : quantize(base * cfg.pump_multiplier);

  auto spikes = detail::place_spikes(cfg, rng);
  std::vector<Candle> structural;
  for (const auto& s : spikes) {
    double open = quantize(base * (1 + rng.uniform(-0.005, 0.005)));
    double close = quantize(base * (1 + rng.uniform(0.0, 0.01)));
    double high = quantize(std::max(open, close) * (1 + rng.uniform(0.0, 0.003)));
    double low = quantize(std::min(open, close) * (1 - rng.uniform(0.0, 0.003)));
    structural.push_back({target - Minutes{s.delay}, open, high, low, close, s.quantity});
  }

  if (cfg.archetype == Archetype::DormantControl) {
    structural.push_back(detail::flat_candle(target, base));
  } else {
    std::int64_t rise = rng.uniform_int(1, kMaxPumpRiseMinutes);
    std::int64_t fall = rng.uniform_int(1, kMaxPumpFallMinutes);
    double prev = base;
    for (std::int64_t i = 0; i < rise + fall; ++i) {
      double level;
      if (i < rise) {
        level = i + 1 == rise ? peak : quantize(base + (peak - base) * static_cast<double>(i + 1) / static_cast<double>(rise));
      } else {
        std::int64_t j = i - rise + 1;
        level = j == fall ? base : quantize(peak - (peak - base) * static_cast<double>(j) / static_cast<double>(fall));
      }
      double qty = quantize(rng.uniform(1e3, 1e5));
      structural.push_back({target + Minutes{i}, prev, std::max(prev, level), std::min(prev, level), level, qty});
      prev = level;
    }
  }
  std::sort(structural.begin(), structural.end(),
            [](const Candle& a, const Candle& b) { return a.timestamp < b.timestamp; });

  std::vector<Candle> candles;
  candles.reserve(static_cast<std::size_t>((kPreEventWindow + kPostEventWindow).count() + 1));
  auto next_structural = structural.begin();
  for (Instant t = window_start(key); t <= window_end(key); t += Minutes{1}) {
    if (next_structural != structural.end() && next_structural->timestamp == t) {
      candles.push_back(*next_structural++);
      continue;
    }
    if (rng.uniform01() >= cfg.sparsity) candles.push_back(detail::flat_candle(t, base));
  }

  GroundTruth truth;
  truth.true_peak_high = peak;
  if (!spikes.empty()) {
    auto by_time = spikes;
    std::sort(by_time.begin(), by_time.end(), [](const auto& a, const auto& b) { return a.delay > b.delay; });
    truth.true_accum_start = target - Minutes{by_time.front().delay};
    truth.true_accum_end = target - Minutes{by_time.back().delay};
    double within = 0;
    for (const auto& s : by_time) {
      truth.true_total_volume += s.quantity;
      if (s.delay <= kLastHour) within += s.quantity;
    }
    truth.true_concentration_60 = within / truth.true_total_volume;
    for (const Candle& c : candles) {
      if (c.timestamp == *truth.true_accum_start) truth.true_entry_price = c.open;
    }
  }
  return {EventWindow(key, std::move(candles)), truth};
}

// ---------------------------------------------------------------------------
// Corpus

struct ArchetypeMix {
  double pre_accumulated = 0.5;
  double on_the_spot = 0.193;
  double dormant_control = 0.307;

  void validate() const {
    for (double p : {pre_accumulated, on_the_spot, dormant_control}) {
      if (!(p >= 0 && p <= 1)) throw Error(ErrorKind::Config, "mix proportions must lie in [0, 1]");
    }
    double sum = pre_accumulated + on_the_spot + dormant_control;
    if (std::abs(sum - 1.0) > 1e-9) {
      throw Error(ErrorKind::Config, "mix proportions must sum to 1 (got " + format_decimal(sum) + ")");
    }
  }

  // Largest-remainder apportionment of n events; ties go to the earlier archetype.
  std::array<std::size_t, 3> counts(std::size_t n) const {
    std::array<double, 3> p{pre_accumulated, on_the_spot, dormant_control};
    std::array<std::size_t, 3> c{};
    std::array<double, 3> rem{};
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < 3; ++i) {
      double exact = p[i] * static_cast<double>(n);
      c[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
      rem[i] = exact - static_cast<double>(c[i]);
      assigned += c[i];
    }
    while (assigned < n) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < 3; ++i) {
        if (rem[i] > rem[best]) best = i;
      }
      ++c[best];
      rem[best] = -1;
      ++assigned;
    }
    return c;
  }
};

struct CorpusConfig {
  std::size_t n = 485;
  ArchetypeMix mix;
  std::uint64_t seed = 1;
  double sparsity = 0.0;
  std::optional<double> last_hour_volume_fraction;  // fixed for every event when set
};

struct CorpusEvent {
  Archetype archetype;
  SynthConfig config;
  GeneratedEvent event;
};

inline const Instant kCorpusEpoch = from_epoch_ms(1724112000000);  // 2024-08-20T00:00:00Z

// Event keys and per-event configs. Symbols repeat so some appear under several
// target dates.
inline std::vector<std::pair<EventKey, SynthConfig>> corpus_plan(const CorpusConfig& cc) {
  cc.mix.validate();
  if (!(cc.sparsity >= 0 && cc.sparsity < 1)) throw Error(ErrorKind::Config, "sparsity must be in [0, 1)");
  if (cc.last_hour_volume_fraction && !(*cc.last_hour_volume_fraction > 0 && *cc.last_hour_volume_fraction < 1)) {
    throw Error(ErrorKind::Config, "last_hour_volume_fraction must be in (0, 1)");
  }
  auto counts = cc.mix.counts(cc.n);
  std::vector<Archetype> kinds;
  kinds.insert(kinds.end(), counts[0], Archetype::PreAccumulated);
  kinds.insert(kinds.end(), counts[1], Archetype::OnTheSpot);
  kinds.insert(kinds.end(), counts[2], Archetype::DormantControl);
  SplitMix64 rng(cc.seed);
  for (std::size_t i = kinds.size(); i > 1; --i) {
    auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i - 1)));
    std::swap(kinds[i - 1], kinds[j]);
  }

  std::size_t pool = std::max<std::size_t>(1, cc.n - cc.n / 8);
  std::vector<std::pair<EventKey, SynthConfig>> plan;
  plan.reserve(cc.n);
  for (std::size_t i = 0; i < cc.n; ++i) {
    char sym[32];
    std::snprintf(sym, sizeof sym, "T%04zu_USDT", i % pool);
    EventKey key{sym, kCorpusEpoch + std::chrono::hours{6 * static_cast<std::int64_t>(i)} +
                          Minutes{rng.uniform_int(0, 359)}};
    SplitMix64 prng(event_seed(cc.seed, key) ^ 0x5DEECE66DULL);
    SynthConfig cfg;
    cfg.archetype = kinds[i];
    cfg.seed = cc.seed;
    cfg.sparsity = cc.sparsity;
    cfg.base_price = std::pow(10.0, prng.uniform(-6.0, 0.0));
    cfg.pump_multiplier = prng.uniform(1.5, 20.0);
    cfg.insider_volume_total = std::pow(10.0, prng.uniform(2.0, 6.0));
    cfg.last_hour_volume_fraction = cc.last_hour_volume_fraction.value_or(prng.uniform(0.05, 0.95));
    switch (kinds[i]) {
      case Archetype::PreAccumulated:
        cfg.spike_count = prng.uniform_int(2, 12);
        cfg.accumulation_span_minutes = prng.uniform_int(120, 5600);
        break;
      case Archetype::OnTheSpot:
        cfg.accumulation_span_minutes = prng.uniform_int(0, kLastHour - 1);
        cfg.spike_count = cfg.accumulation_span_minutes == 0
                              ? 1
                              : prng.uniform_int(2, std::min<std::int64_t>(6, cfg.accumulation_span_minutes + 1));
        break;
      case Archetype::DormantControl:
        cfg.spike_count = 0;
        cfg.accumulation_span_minutes = 0;
        cfg.pump_multiplier = 1.0;
        break;
    }
    plan.emplace_back(std::move(key), cfg);
  }
  return plan;
}

// Generates events one at a time in plan order.
inline void generate_corpus(const CorpusConfig& cc, const std::function<void(const CorpusEvent&)>& sink) {
  for (auto& [key, cfg] : corpus_plan(cc)) {
    sink(CorpusEvent{cfg.archetype, cfg, generate_event(cfg, key)});
  }
}

inline std::vector<CorpusEvent> generate_corpus(const CorpusConfig& cc) {
  std::vector<CorpusEvent> out;
  generate_corpus(cc, [&](const CorpusEvent& e) { out.push_back(e); });
  return out;
}

inline constexpr std::string_view kGroundTruthHeader =
    "symbol,target_date,true_accum_start,true_accum_end,true_total_volume,true_peak_high,true_entry_price,"
    "true_concentration_60";

inline std::string ground_truth_row(const EventKey& key, const GroundTruth& t) {
  auto ts = [](const std::optional<Instant>& v) { return v ? format_iso8601(*v) : std::string(); };
  auto num = [](const std::optional<double>& v) { return v ? format_decimal(*v) : std::string(); };
  return key.symbol + ',' + format_iso8601(key.target_date) + ',' + ts(t.true_accum_start) + ',' +
         ts(t.true_accum_end) + ',' + format_decimal(t.true_total_volume) + ',' + format_decimal(t.true_peak_high) +
         ',' + num(t.true_entry_price) + ',' + num(t.true_concentration_60) + '\n';
}

struct CorpusPaths {
  std::filesystem::path manifest;
  std::filesystem::path candles_dir;
  std::filesystem::path ground_truth;
};

inline CorpusPaths corpus_paths(const std::filesystem::path& out_dir) {
  return {out_dir / "manifest.csv", out_dir / "candles", out_dir / "ground_truth.csv"};
}

// manifest.csv, candles/<event>.csv and ground_truth.csv under out_dir.
inline CorpusPaths write_corpus(const CorpusConfig& cc, const std::filesystem::path& out_dir) {
  auto paths = corpus_paths(out_dir);
  std::filesystem::create_directories(paths.candles_dir);
  EventManifest manifest;
  std::string truth(kGroundTruthHeader);
  truth += '\n';
  generate_corpus(cc, [&](const CorpusEvent& e) {
    const auto& key = e.event.window.key();
    manifest.entries.push_back(key);
    write_candles_csv(paths.candles_dir / event_file_name(key), e.event.window.candles());
    truth += ground_truth_row(key, e.event.truth);
  });
  atomic_write_file(paths.manifest, manifest_to_csv(manifest));
  atomic_write_file(paths.ground_truth, truth);
  return paths;
}

}  // namespace pumpscope::synth
