#pragma once

#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pumpscope/accumulation.hpp"
#include "pumpscope/core.hpp"
#include "pumpscope/ingestion.hpp"
#include "pumpscope/profit.hpp"

namespace pumpscope::report {

inline std::string fixed(double x, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
  std::string s(buf);
  if (s == "-0" || s.rfind("-0.", 0) == 0) {
    // Avoid "-0.00" for tiny negatives.
    bool all_zero = s.find_first_not_of("-0.") == std::string::npos;
    if (all_zero) s.erase(0, 1);
  }
  return s;
}

inline std::string opt_instant(const std::optional<Instant>& t) { return t ? format_iso8601(*t) : std::string(); }

struct SpanRow {
  EventKey key;
  AccumulationSpan span;
  Archetype archetype;
};

inline std::string spans_csv(std::span<const SpanRow> rows) {
  std::string out = "symbol,target_date,accum_start,accum_end,span_minutes,archetype\n";
  for (const auto& r : rows) {
    auto m = span_minutes(r.span);
    out += r.key.symbol + ',' + format_iso8601(r.key.target_date) + ',' + opt_instant(r.span.start()) + ',' +
           opt_instant(r.span.end()) + ',' + (m ? std::to_string(*m) : std::string()) + ',' +
           std::string(to_string(r.archetype)) + '\n';
  }
  return out;
}

inline std::string prevalence_csv(const PrevalenceReport& p) {
  return "total_events,with_accumulation,without_accumulation,with_pct,without_pct\n" +
         std::to_string(p.total_events) + ',' + std::to_string(p.with_accumulation) + ',' +
         std::to_string(p.without_accumulation) + ',' + fixed(p.with_pct, 1) + ',' + fixed(p.without_pct, 1) + '\n';
}

// Header only when there are no accumulation events.
inline std::string span_stats_csv(const std::optional<SpanStats>& s) {
  std::string out = "count,minimum,average,maximum,std_dev\n";
  if (s) {
    out += std::to_string(s->count) + ',' + std::to_string(s->minimum) + ',' + fixed(s->average, 1) + ',' +
           std::to_string(s->maximum) + ',' + fixed(s->std_dev, 1) + '\n';
  }
  return out;
}

inline std::string histogram_csv(const Histogram& h) {
  std::string out = "bin_lower_minutes,count\n";
  for (const auto& b : h.bins) out += std::to_string(b.lower_bound_minutes) + ',' + std::to_string(b.count) + '\n';
  return out;
}

inline constexpr std::string_view kPerEventProfitHeader =
    "symbol,target_date,scenario,volume,proxy_price,peak_high,cost,proceeds,profit_abs,profit_pct";

struct ProfitRow {
  EventKey key;
  ProfitEstimate estimate;
};

inline std::string profits_per_event_csv(std::span<const ProfitRow> rows) {
  std::string out(kPerEventProfitHeader);
  out += '\n';
  for (const auto& r : rows) {
    const auto& e = r.estimate;
    out += r.key.symbol + ',' + format_iso8601(r.key.target_date) + ',' + to_char(e.scenario) + ',' +
           format_decimal(e.volume) + ',' + format_decimal(e.proxy_price) + ',' + format_decimal(e.peak_high) + ',' +
           format_decimal(e.cost) + ',' + format_decimal(e.proceeds) + ',' + format_decimal(e.profit_abs) + ',' +
           format_decimal(e.profit_pct) + '\n';
  }
  return out;
}

// Reads the per-event profit CSV back (used for re-aggregation and fixtures).
inline std::vector<ProfitRow> parse_profits_per_event(std::string_view text, std::string_view source = "<profits>") {
  std::vector<ProfitRow> rows;
  bool header_seen = false;
  detail::for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    if (!header_seen) {
      detail::check_header(line, kPerEventProfitHeader, source);
      header_seen = true;
      return;
    }
    std::array<std::string_view, 10> f{};
    if (detail::split_fields(line, f) != 10) throw detail::parse_error(source, line_no, "expected 10 fields");
    ProfitRow r;
    r.key.symbol = std::string(f[0]);
    auto ts = parse_iso8601(f[1]);
    if (!ts) throw detail::parse_error(source, line_no, "bad target_date");
    r.key.target_date = *ts;
    if (f[2].size() != 1 || f[2][0] < 'A' || f[2][0] > 'D') throw detail::parse_error(source, line_no, "bad scenario");
    r.estimate.scenario = static_cast<ScenarioId>(f[2][0] - 'A');
    double* dst[7] = {&r.estimate.volume, &r.estimate.proxy_price, &r.estimate.peak_high, &r.estimate.cost,
                      &r.estimate.proceeds, &r.estimate.profit_abs, &r.estimate.profit_pct};
    for (std::size_t i = 0; i < 7; ++i) {
      if (!detail::parse_double(f[i + 3], *dst[i])) throw detail::parse_error(source, line_no, "bad number");
    }
    rows.push_back(std::move(r));
  });
  return rows;
}

// Table-shaped: two decimals, one row per scenario. Header only when there are no estimates.
inline std::string profits_aggregate_csv(std::span<const ScenarioAggregate> aggs) {
  std::string out =
      "scenario,avg_profit_abs,median_profit_abs,avg_profit_pct,median_profit_pct,event_count,"
      "p5_profit_abs,p25_profit_abs,p75_profit_abs,p95_profit_abs,"
      "p5_profit_pct,p25_profit_pct,p75_profit_pct,p95_profit_pct\n";
  for (const auto& a : aggs) {
    out += to_char(a.scenario);
    for (double x : {a.avg_profit_abs, a.median_profit_abs, a.avg_profit_pct, a.median_profit_pct}) out += ',' + fixed(x, 2);
    out += ',' + std::to_string(a.event_count);
    for (const Percentiles& p : {a.abs_percentiles, a.pct_percentiles}) {
      for (double x : {p.p5, p.p25, p.p75, p.p95}) out += ',' + fixed(x, 2);
    }
    out += '\n';
  }
  return out;
}

struct ConcentrationRow {
  EventKey key;
  std::int64_t horizon_minutes;
  ConcentrationParts parts;
};

inline std::string concentration_csv(std::span<const ConcentrationRow> rows) {
  std::string out = "symbol,target_date,horizon_minutes,pre_pump_volume,volume_within_horizon,concentration\n";
  for (const auto& r : rows) {
    out += r.key.symbol + ',' + format_iso8601(r.key.target_date) + ',' + std::to_string(r.horizon_minutes) + ',' +
           format_decimal(r.parts.total) + ',' + format_decimal(r.parts.within_horizon) + ',' +
           (r.parts.total > 0 ? format_decimal(r.parts.within_horizon / r.parts.total) : std::string()) + '\n';
  }
  return out;
}

struct ConcentrationAggregate {
  std::int64_t horizon_minutes = 0;
  std::size_t events_with_volume = 0;
  std::optional<double> volume_weighted;
  std::optional<double> per_event_median;
};

// Both aggregations: pooled volume across events, and the median of per-event shares.
inline ConcentrationAggregate aggregate_concentration(std::span<const ConcentrationRow> rows, std::int64_t horizon) {
  ConcentrationAggregate a;
  a.horizon_minutes = horizon;
  std::vector<double> within, totals, shares;
  for (const auto& r : rows) {
    if (r.horizon_minutes != horizon || !(r.parts.total > 0)) continue;
    within.push_back(r.parts.within_horizon);
    totals.push_back(r.parts.total);
    shares.push_back(r.parts.within_horizon / r.parts.total);
  }
  a.events_with_volume = shares.size();
  if (!shares.empty()) {
    auto sw = stats::sorted(within);
    auto st = stats::sorted(totals);
    double num = 0, den = 0;
    for (double x : sw) num += x;
    for (double x : st) den += x;
    a.volume_weighted = num / den;
    a.per_event_median = stats::median(shares);
  }
  return a;
}

inline std::string concentration_aggregate_csv(std::span<const ConcentrationAggregate> aggs) {
  std::string out = "horizon_minutes,events_with_volume,volume_weighted,per_event_median\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_decimal(*v) : std::string(); };
  for (const auto& a : aggs) {
    out += std::to_string(a.horizon_minutes) + ',' + std::to_string(a.events_with_volume) + ',' +
           opt(a.volume_weighted) + ',' + opt(a.per_event_median) + '\n';
  }
  return out;
}

struct SkipRow {
  EventKey key;
  std::string stage;   // "data" or "profit"
  std::string reason;
};

inline std::string csv_escape(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + '"';
}

inline std::string skips_csv(std::span<const SkipRow> rows) {
  std::string out = "symbol,target_date,stage,reason\n";
  for (const auto& r : rows) {
    out += r.key.symbol + ',' + format_iso8601(r.key.target_date) + ',' + r.stage + ',' + csv_escape(r.reason) + '\n';
  }
  return out;
}

}  // namespace pumpscope::report
