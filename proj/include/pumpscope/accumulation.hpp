#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "pumpscope/core.hpp"
#include "pumpscope/error.hpp"
#include "pumpscope/stats.hpp"

namespace pumpscope {

// Scans candles in time order, stopping at the first one at or after the target
// date. The first and last candles with quantity > 0 bound the span.
inline AccumulationSpan compute_accumulation_span(const EventWindow& w) {
  std::optional<Instant> start;
  Instant end{};
  for (const Candle& c : w.candles()) {
    if (c.timestamp >= w.target_date()) break;
    if (c.quantity > 0) {
      if (!start) start = c.timestamp;
      end = c.timestamp;
    }
  }
  if (!start) return {};
  return {*start, end};
}

// A single-minute span counts as 1 minute.
inline std::optional<std::int64_t> span_minutes(const AccumulationSpan& s) {
  if (!s) return std::nullopt;
  return std::max<std::int64_t>(1, minutes_between(*s.start(), *s.end()));
}

struct PrevalenceReport {
  std::size_t total_events = 0;
  std::size_t with_accumulation = 0;
  std::size_t without_accumulation = 0;
  double with_pct = 0;
  double without_pct = 0;
};

inline double round1(double x) { return std::round(x * 10.0) / 10.0; }

inline PrevalenceReport prevalence(std::span<const AccumulationSpan> spans) {
  PrevalenceReport r;
  r.total_events = spans.size();
  r.with_accumulation = static_cast<std::size_t>(std::count_if(spans.begin(), spans.end(),
                                                               [](const AccumulationSpan& s) { return s.present(); }));
  r.without_accumulation = r.total_events - r.with_accumulation;
  if (r.total_events > 0) {
    auto total = static_cast<double>(r.total_events);
    r.with_pct = round1(100.0 * static_cast<double>(r.with_accumulation) / total);
    r.without_pct = round1(100.0 * static_cast<double>(r.without_accumulation) / total);
  }
  return r;
}

struct SpanStats {
  std::int64_t minimum = 0;
  double average = 0;
  std::int64_t maximum = 0;
  double std_dev = 0;  // population
  std::size_t count = 0;
};

inline std::vector<double> present_span_minutes(std::span<const AccumulationSpan> spans) {
  std::vector<double> out;
  for (const auto& s : spans) {
    if (auto m = span_minutes(s)) out.push_back(static_cast<double>(*m));
  }
  return out;
}

inline SpanStats span_stats(std::span<const AccumulationSpan> spans) {
  auto mins = present_span_minutes(spans);
  if (mins.empty()) throw Error(ErrorKind::NoAccumulation, "no accumulation events");
  auto sorted = stats::sorted(mins);
  SpanStats st;
  st.count = sorted.size();
  st.minimum = static_cast<std::int64_t>(sorted.front());
  st.maximum = static_cast<std::int64_t>(sorted.back());
  st.average = stats::mean_sorted(sorted);
  st.std_dev = stats::population_stddev(sorted);
  return st;
}

struct HistogramBin {
  std::int64_t lower_bound_minutes = 0;
  std::size_t count = 0;

  friend bool operator==(const HistogramBin&, const HistogramBin&) = default;
};

struct Histogram {
  std::int64_t bin_width_minutes = 1;
  std::vector<HistogramBin> bins;
};

// Contiguous bins [0, w), [w, 2w), ... up to the bin holding the largest span.
inline Histogram span_histogram(std::span<const AccumulationSpan> spans, std::int64_t bin_width_minutes) {
  if (bin_width_minutes < 1) throw Error(ErrorKind::Config, "histogram bin width must be >= 1");
  Histogram h;
  h.bin_width_minutes = bin_width_minutes;
  std::vector<std::int64_t> mins;
  for (const auto& s : spans) {
    if (auto m = span_minutes(s)) mins.push_back(*m);
  }
  if (mins.empty()) return h;
  std::int64_t top = *std::max_element(mins.begin(), mins.end());
  std::size_t nbins = static_cast<std::size_t>(top / bin_width_minutes) + 1;
  h.bins.resize(nbins);
  for (std::size_t i = 0; i < nbins; ++i) h.bins[i].lower_bound_minutes = static_cast<std::int64_t>(i) * bin_width_minutes;
  for (auto m : mins) ++h.bins[static_cast<std::size_t>(m / bin_width_minutes)].count;
  return h;
}

struct SpikeDelay {
  std::int64_t delay_minutes = 0;
  double quantity = 0;

  friend bool operator==(const SpikeDelay&, const SpikeDelay&) = default;
};

// Pre-pump candles with quantity > 0, nearest to the target date first.
inline std::vector<SpikeDelay> spike_delays(const EventWindow& w) {
  std::vector<SpikeDelay> out;
  auto pre = w.pre_pump();
  for (auto it = pre.rbegin(); it != pre.rend(); ++it) {
    if (it->quantity > 0) out.push_back({minutes_between(it->timestamp, w.target_date()), it->quantity});
  }
  return out;
}

struct ConcentrationParts {
  double within_horizon = 0;
  double total = 0;
};

inline ConcentrationParts concentration_parts(const EventWindow& w, std::int64_t horizon_minutes) {
  ConcentrationParts p;
  Instant cutoff = w.target_date() - Minutes{horizon_minutes};
  for (const Candle& c : w.pre_pump()) {
    if (!(c.quantity > 0)) continue;
    p.total += c.quantity;
    if (c.timestamp >= cutoff) p.within_horizon += c.quantity;
  }
  return p;
}

// Share of pre-pump volume traded within `horizon_minutes` of the target date.
// nullopt when there is no pre-pump volume at all.
inline std::optional<double> volume_concentration(const EventWindow& w, std::int64_t horizon_minutes) {
  if (horizon_minutes < 1) throw Error(ErrorKind::Config, "concentration horizon must be >= 1 minute");
  auto p = concentration_parts(w, horizon_minutes);
  if (!(p.total > 0)) return std::nullopt;
  return std::min(1.0, p.within_horizon / p.total);
}

enum class Archetype { PreAccumulated, OnTheSpot };

inline std::string_view to_string(Archetype a) {
  return a == Archetype::PreAccumulated ? "pre-accumulated" : "on-the-spot";
}

inline constexpr std::int64_t kDefaultArchetypeThresholdMinutes = 60;

// On-the-spot when there is no span, or the span starts within threshold of the target date.
inline Archetype classify_archetype(const AccumulationSpan& s, const EventWindow& w,
                                    std::int64_t threshold_minutes = kDefaultArchetypeThresholdMinutes) {
  if (threshold_minutes < 1) throw Error(ErrorKind::Config, "archetype threshold must be >= 1 minute");
  if (!s) return Archetype::OnTheSpot;
  return minutes_between(*s.start(), w.target_date()) <= threshold_minutes ? Archetype::OnTheSpot
                                                                           : Archetype::PreAccumulated;
}

}  // namespace pumpscope
