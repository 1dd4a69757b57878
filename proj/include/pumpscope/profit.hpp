#pragma once

#include <algorithm>
#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "pumpscope/core.hpp"
#include "pumpscope/error.hpp"
#include "pumpscope/stats.hpp"

namespace pumpscope {

inline constexpr double kSinglePointFraction = 0.70;

struct Tranche {
  double volume_share;
  double price_fraction;  // of the peak high
};

inline constexpr std::array<Tranche, 3> kTranches{{{0.20, 0.50}, {0.30, 0.60}, {0.50, 0.80}}};

enum class PriceProxy { FirstTrade, Vwap };
enum class Liquidation { SinglePoint, Tranche };

// Per-candle price used in the VWAP.
enum class VwapPriceField { Close, Typical };

inline std::string_view to_string(VwapPriceField f) { return f == VwapPriceField::Close ? "close" : "typical"; }

enum class ScenarioId { A, B, C, D };

inline constexpr std::array<ScenarioId, 4> kScenarios{ScenarioId::A, ScenarioId::B, ScenarioId::C, ScenarioId::D};

inline char to_char(ScenarioId s) { return static_cast<char>('A' + static_cast<int>(s)); }

inline PriceProxy proxy_of(ScenarioId s) {
  return (s == ScenarioId::A || s == ScenarioId::B) ? PriceProxy::FirstTrade : PriceProxy::Vwap;
}

inline Liquidation liquidation_of(ScenarioId s) {
  return (s == ScenarioId::A || s == ScenarioId::C) ? Liquidation::SinglePoint : Liquidation::Tranche;
}

struct ProfitInputs {
  double accumulated_volume = 0;  // V
  double first_trade_price = 0;   // P1
  double vwap_price = 0;          // P_VWAP
  double peak_high = 0;           // H

  void validate() const {
    if (!(accumulated_volume > 0)) throw Error(ErrorKind::ZeroVolume, "accumulated volume must be > 0");
    if (!(first_trade_price > 0 && vwap_price > 0 && peak_high > 0)) {
      throw Error(ErrorKind::Validation, "profit input prices must be > 0");
    }
  }
};

struct ProfitEstimate {
  ScenarioId scenario = ScenarioId::A;
  double volume = 0;
  double proxy_price = 0;
  double peak_high = 0;
  double cost = 0;
  double proceeds = 0;
  double profit_abs = 0;
  double profit_pct = 0;
};

namespace detail {

inline void require_span(const AccumulationSpan& s) {
  if (!s) throw Error(ErrorKind::NoAccumulation, "no accumulation");
}

}  // namespace detail

// Total base-asset quantity over candles in [accum_start, accum_end].
inline double accumulated_volume(const EventWindow& w, const AccumulationSpan& s) {
  detail::require_span(s);
  double v = 0;
  for (const Candle& c : w.between(*s.start(), *s.end())) v += c.quantity;
  return v;
}

// Open of the candle at accum_start.
inline double first_trade_price(const EventWindow& w, const AccumulationSpan& s) {
  detail::require_span(s);
  auto at = w.between(*s.start(), *s.start());
  if (at.empty()) throw Error(ErrorKind::Validation, "span start has no candle in the window");
  return at.front().open;
}

inline double candle_price(const Candle& c, VwapPriceField field) {
  return field == VwapPriceField::Close ? c.close : (c.high + c.low + c.close) / 3.0;
}

inline double vwap(const EventWindow& w, const AccumulationSpan& s, VwapPriceField field = VwapPriceField::Close) {
  detail::require_span(s);
  double pv = 0;
  double v = 0;
  for (const Candle& c : w.between(*s.start(), *s.end())) {
    if (!(c.quantity > 0)) continue;
    pv += candle_price(c, field) * c.quantity;
    v += c.quantity;
  }
  if (!(v > 0)) throw Error(ErrorKind::ZeroVolume, "undefined VWAP: zero volume over the span");
  return pv / v;
}

// Max high over [target_date, target_date + 2 days].
inline double peak_high(const EventWindow& w) {
  auto post = w.between(w.target_date(), w.target_date() + kPostEventWindow);
  if (post.empty()) throw Error(ErrorKind::NoPumpData, "no pump window data");
  double h = post.front().high;
  for (const Candle& c : post) h = std::max(h, c.high);
  return h;
}

inline double liquidation_proceeds(double volume, double peak, Liquidation mode) {
  if (mode == Liquidation::SinglePoint) return volume * (kSinglePointFraction * peak);
  double proceeds = 0;
  for (const Tranche& t : kTranches) proceeds += (t.volume_share * volume) * (t.price_fraction * peak);
  return proceeds;
}

inline ProfitEstimate estimate_profit(const ProfitInputs& in, ScenarioId scenario) {
  ProfitEstimate e;
  e.scenario = scenario;
  e.volume = in.accumulated_volume;
  e.peak_high = in.peak_high;
  e.proxy_price = proxy_of(scenario) == PriceProxy::FirstTrade ? in.first_trade_price : in.vwap_price;
  e.cost = e.volume * e.proxy_price;
  e.proceeds = liquidation_proceeds(e.volume, e.peak_high, liquidation_of(scenario));
  e.profit_abs = e.proceeds - e.cost;
  e.profit_pct = 100.0 * e.profit_abs / e.cost;
  return e;
}

struct EventProfit {
  ProfitInputs inputs;
  std::array<ProfitEstimate, 4> estimates;
};

inline EventProfit estimate_all(const ProfitInputs& in) {
  in.validate();
  EventProfit out{in, {}};
  for (std::size_t i = 0; i < kScenarios.size(); ++i) out.estimates[i] = estimate_profit(in, kScenarios[i]);
  return out;
}

inline ProfitInputs profit_inputs(const EventWindow& w, const AccumulationSpan& s,
                                  VwapPriceField field = VwapPriceField::Close) {
  ProfitInputs in;
  in.accumulated_volume = accumulated_volume(w, s);
  in.first_trade_price = first_trade_price(w, s);
  in.vwap_price = vwap(w, s, field);
  in.peak_high = peak_high(w);
  in.validate();
  return in;
}

// All four scenarios for one event. Throws pumpscope::Error when a precondition fails.
inline EventProfit run_event(const EventWindow& w, const AccumulationSpan& s,
                             VwapPriceField field = VwapPriceField::Close) {
  return estimate_all(profit_inputs(w, s, field));
}

struct Percentiles {
  double p5 = 0, p25 = 0, p75 = 0, p95 = 0;
};

struct ScenarioAggregate {
  ScenarioId scenario = ScenarioId::A;
  double avg_profit_abs = 0;
  double median_profit_abs = 0;
  double avg_profit_pct = 0;
  double median_profit_pct = 0;
  Percentiles abs_percentiles;
  Percentiles pct_percentiles;
  std::size_t event_count = 0;
};

namespace detail {

inline Percentiles percentiles_of(std::span<const double> sorted) {
  return {stats::percentile_sorted(sorted, 0.05), stats::percentile_sorted(sorted, 0.25),
          stats::percentile_sorted(sorted, 0.75), stats::percentile_sorted(sorted, 0.95)};
}

}  // namespace detail

// One aggregate per scenario that has estimates, in A..D order.
inline std::vector<ScenarioAggregate> aggregate(std::span<const ProfitEstimate> estimates) {
  if (estimates.empty()) throw Error(ErrorKind::EmptyInput, "no profit estimates to aggregate");
  std::vector<ScenarioAggregate> out;
  for (ScenarioId id : kScenarios) {
    std::vector<double> abs_vals, pct_vals;
    for (const auto& e : estimates) {
      if (e.scenario != id) continue;
      abs_vals.push_back(e.profit_abs);
      pct_vals.push_back(e.profit_pct);
    }
    if (abs_vals.empty()) continue;
    std::sort(abs_vals.begin(), abs_vals.end());
    std::sort(pct_vals.begin(), pct_vals.end());
    ScenarioAggregate a;
    a.scenario = id;
    a.event_count = abs_vals.size();
    a.avg_profit_abs = stats::mean_sorted(abs_vals);
    a.median_profit_abs = stats::percentile_sorted(abs_vals, 0.5);
    a.avg_profit_pct = stats::mean_sorted(pct_vals);
    a.median_profit_pct = stats::percentile_sorted(pct_vals, 0.5);
    a.abs_percentiles = detail::percentiles_of(abs_vals);
    a.pct_percentiles = detail::percentiles_of(pct_vals);
    out.push_back(a);
  }
  return out;
}

inline std::vector<ScenarioAggregate> aggregate(std::span<const EventProfit> events) {
  std::vector<ProfitEstimate> flat;
  flat.reserve(events.size() * 4);
  for (const auto& ev : events) flat.insert(flat.end(), ev.estimates.begin(), ev.estimates.end());
  return aggregate(std::span<const ProfitEstimate>(flat));
}

}  // namespace pumpscope
