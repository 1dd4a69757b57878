#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "pumpscope/accumulation.hpp"
#include "pumpscope/profit.hpp"
#include "pumpscope/synth.hpp"
#include "support/oracles.hpp"

namespace pumpscope {
namespace {

const Instant kT = from_epoch_ms(1733061600000);
const EventKey kKey{"BTC_X", kT};

Candle at(std::int64_t minute, double o, double h, double l, double c, double q) {
  return {kT + Minutes{minute}, o, h, l, c, q};
}
Candle flat(std::int64_t minute, double price, double q) { return at(minute, price, price, price, price, q); }

AccumulationSpan span_of(const EventWindow& w) { return compute_accumulation_span(w); }

TEST(AccumulatedVolume, SumsOverSpan) {
  EventWindow w(kKey, {flat(-30, 1, 10), flat(-20, 1, 0), flat(-10, 1, 5), flat(0, 2, 99)});
  EXPECT_EQ(accumulated_volume(w, span_of(w)), 15);
  EventWindow one(kKey, {flat(-3, 1, 42), flat(1, 2, 1)});
  EXPECT_EQ(accumulated_volume(one, span_of(one)), 42);
  try {
    accumulated_volume(w, AccumulationSpan{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoAccumulation);
  }
}

TEST(FirstTradePrice, OpenOfFirstSpanCandle) {
  EventWindow w(kKey, {flat(-50, 0.002, 0), at(-40, 0.004, 0.005, 0.003, 0.0045, 3), flat(-5, 0.006, 2)});
  EXPECT_EQ(first_trade_price(w, span_of(w)), 0.004);
  EventWindow one(kKey, {at(-7, 0.01, 0.02, 0.01, 0.015, 1)});
  EXPECT_EQ(first_trade_price(one, span_of(one)), 0.01);
  EXPECT_THROW(first_trade_price(w, AccumulationSpan{}), Error);
}

TEST(Vwap, Examples) {
  EventWindow single(kKey, {flat(-5, 0.01, 100)});
  EXPECT_EQ(vwap(single, span_of(single)), 0.01);
  EventWindow two(kKey, {flat(-5, 1.0, 10), flat(-4, 2.0, 30)});
  EXPECT_DOUBLE_EQ(vwap(two, span_of(two)), 1.75);
  EventWindow equal(kKey, {flat(-9, 1.0, 5), flat(-8, 2.0, 5), flat(-7, 6.0, 5)});
  EXPECT_DOUBLE_EQ(vwap(equal, span_of(equal)), 3.0);
}

TEST(Vwap, CloseVersusTypicalPrice) {
  EventWindow w(kKey, {at(-5, 1.0, 4.0, 1.0, 1.0, 10)});
  EXPECT_EQ(vwap(w, span_of(w), VwapPriceField::Close), 1.0);
  EXPECT_DOUBLE_EQ(vwap(w, span_of(w), VwapPriceField::Typical), 2.0);
}

TEST(Vwap, ZeroVolumeSpanIsUndefined) {
  EventWindow w(kKey, {flat(-5, 1.0, 0), flat(-4, 1.0, 0)});
  try {
    vwap(w, AccumulationSpan(kT - Minutes{5}, kT - Minutes{4}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ZeroVolume);
  }
}

TEST(Vwap, BoundedByCloses) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 200; ++i) {
    auto w = testing::random_window(rng, {"V_USDT", kT + Minutes{i}}, 0.2, 0.02);
    auto s = span_of(w);
    if (!s) continue;
    double lo = 1e300, hi = -1e300;
    for (const auto& c : w.between(*s.start(), *s.end())) {
      if (c.quantity > 0) {
        lo = std::min(lo, c.close);
        hi = std::max(hi, c.close);
      }
    }
    double v = vwap(w, s);
    EXPECT_GE(v, lo * (1 - 1e-12));
    EXPECT_LE(v, hi * (1 + 1e-12));
  }
}

TEST(PeakHigh, PostTargetWindowOnly) {
  EventWindow w(kKey, {at(-100, 1, 100, 1, 1, 1), at(0, 1, 1, 1, 1, 1), at(1, 1, 9, 1, 1, 1), at(2, 1, 3, 1, 1, 1)});
  EXPECT_EQ(peak_high(w), 9);
  try {
    peak_high(EventWindow(kKey, {flat(-1, 1, 1)}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoPumpData);
  }
}

TEST(PeakHigh, RecoversGeneratorPeak) {
  synth::SynthConfig cfg;
  cfg.base_price = 0.0125;
  cfg.pump_multiplier = 10;
  auto ev = synth::generate_event(cfg, kKey);
  EXPECT_EQ(peak_high(ev.window), quantize(10 * 0.0125));
  EXPECT_EQ(peak_high(ev.window), ev.truth.true_peak_high);
}

TEST(LiquidationProceeds, Examples) {
  EXPECT_DOUBLE_EQ(liquidation_proceeds(100, 10, Liquidation::SinglePoint), 700);
  EXPECT_DOUBLE_EQ(liquidation_proceeds(100, 10, Liquidation::Tranche), 680);
}

TEST(LiquidationProceeds, TrancheEqualsClosedForm) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> e(-6, 6);
  for (int i = 0; i < 10000; ++i) {
    double v = std::pow(10.0, e(rng));
    double h = std::pow(10.0, e(rng));
    EXPECT_TRUE(approx_equal(liquidation_proceeds(v, h, Liquidation::Tranche), testing::tranche_closed_form(v, h)));
  }
}

TEST(EstimateProfit, ScenarioArithmetic) {
  ProfitInputs in{100, 1, 2, 10};
  auto a = estimate_profit(in, ScenarioId::A);
  EXPECT_DOUBLE_EQ(a.cost, 100);
  EXPECT_DOUBLE_EQ(a.proceeds, 700);
  EXPECT_DOUBLE_EQ(a.profit_abs, 600);
  EXPECT_DOUBLE_EQ(a.profit_pct, 600);
  auto b = estimate_profit(in, ScenarioId::B);
  EXPECT_DOUBLE_EQ(b.proceeds, 680);
  EXPECT_DOUBLE_EQ(b.profit_abs, 580);
  EXPECT_DOUBLE_EQ(b.profit_pct, 580);
  auto c = estimate_profit(in, ScenarioId::C);
  EXPECT_DOUBLE_EQ(c.proxy_price, 2);
  EXPECT_DOUBLE_EQ(c.profit_abs, 500);
}

TEST(EstimateProfit, Breakeven) {
  EXPECT_DOUBLE_EQ(estimate_profit({50, 7, 7, 10}, ScenarioId::A).profit_pct, 0.0);
  EXPECT_NEAR(estimate_profit({50, 6.8, 6.8, 10}, ScenarioId::B).profit_pct, 0.0, 1e-12);
  EXPECT_NEAR(estimate_profit({50, 6.8, 6.8, 10}, ScenarioId::D).profit_abs, 0.0, 1e-9);
}

TEST(RunEvent, FourScenarios) {
  // V = 100, P1 = 1 (first open), VWAP = (1.5*50 + 2.5*50)/100 = 2, H = 10.
  EventWindow w(kKey, {at(-20, 1, 1.5, 1, 1.5, 50), at(-10, 1.5, 2.5, 1.5, 2.5, 50), at(0, 2.5, 10, 2.5, 4, 500),
                       at(1, 4, 4, 3, 3, 10)});
  auto ev = run_event(w, span_of(w));
  EXPECT_DOUBLE_EQ(ev.inputs.accumulated_volume, 100);
  EXPECT_DOUBLE_EQ(ev.inputs.first_trade_price, 1);
  EXPECT_DOUBLE_EQ(ev.inputs.vwap_price, 2);
  EXPECT_DOUBLE_EQ(ev.inputs.peak_high, 10);
  const double expected[] = {600, 580, 500, 480};
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(ev.estimates[i].scenario, kScenarios[i]);
    EXPECT_DOUBLE_EQ(ev.estimates[i].profit_abs, expected[i]);
  }
}

TEST(RunEvent, PropagatesPreconditionFailures) {
  EventWindow no_post(kKey, {flat(-5, 1, 1)});
  EXPECT_THROW(run_event(no_post, span_of(no_post)), Error);
  EventWindow no_span(kKey, {flat(-5, 1, 0), flat(0, 1, 1)});
  EXPECT_THROW(run_event(no_span, span_of(no_span)), Error);
}

ProfitInputs random_inputs(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> e(-4, 4);
  return {std::pow(10.0, e(rng)), std::pow(10.0, e(rng)), std::pow(10.0, e(rng)), std::pow(10.0, e(rng))};
}

TEST(ProfitProperties, OrderingAndConstantGap) {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 5000; ++i) {
    auto in = random_inputs(rng);
    auto ev = estimate_all(in);
    const auto& [a, b, c, d] = ev.estimates;
    EXPECT_GE(a.profit_abs, b.profit_abs);
    EXPECT_GE(c.profit_abs, d.profit_abs);
    EXPECT_GE(a.profit_pct, b.profit_pct);
    EXPECT_GE(c.profit_pct, d.profit_pct);
    double gap = 0.02 * in.accumulated_volume * in.peak_high;
    // Each profit is a difference, so the rounding error scales with the larger operand.
    double ab_scale = std::max({a.proceeds, a.cost, gap});
    double cd_scale = std::max({c.proceeds, c.cost, gap});
    EXPECT_NEAR(a.profit_abs - b.profit_abs, gap, 1e-9 * ab_scale);
    EXPECT_NEAR(c.profit_abs - d.profit_abs, gap, 1e-9 * cd_scale);
    for (const auto& e : ev.estimates) {
      EXPECT_DOUBLE_EQ(e.profit_abs, e.proceeds - e.cost);
      EXPECT_DOUBLE_EQ(e.profit_pct, 100 * e.profit_abs / e.cost);
    }
  }
}

TEST(ProfitProperties, ScaleInvariance) {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> e(-6, 6);
  for (int i = 0; i < 1000; ++i) {
    auto in = random_inputs(rng);
    double lambda = std::pow(10.0, e(rng));
    ProfitInputs priced = in;
    priced.first_trade_price *= lambda;
    priced.vwap_price *= lambda;
    priced.peak_high *= lambda;
    ProfitInputs sized = in;
    sized.accumulated_volume *= lambda;
    auto base = estimate_all(in);
    for (const auto& scaled : {estimate_all(priced), estimate_all(sized)}) {
      for (int s = 0; s < 4; ++s) {
        const auto& x = base.estimates[s];
        const auto& y = scaled.estimates[s];
        double mag = std::max(std::abs(x.proceeds), std::abs(x.cost));
        EXPECT_NEAR(y.profit_pct, x.profit_pct, 1e-9 * std::max(1.0, std::abs(x.profit_pct)) + 1e-9 * 100 * mag / x.cost);
        EXPECT_NEAR(y.profit_abs, lambda * x.profit_abs, 1e-9 * lambda * mag);
      }
    }
  }
}

std::vector<ProfitEstimate> estimates_with_abs(std::initializer_list<double> values) {
  std::vector<ProfitEstimate> out;
  for (double v : values) {
    ProfitEstimate e;
    e.scenario = ScenarioId::A;
    e.profit_abs = v;
    e.profit_pct = 10 * v;
    out.push_back(e);
  }
  return out;
}

TEST(Aggregate, MeanAndMedian) {
  auto aggs = aggregate(estimates_with_abs({1, 2, 30}));
  ASSERT_EQ(aggs.size(), 1u);
  EXPECT_DOUBLE_EQ(aggs[0].avg_profit_abs, 11);
  EXPECT_DOUBLE_EQ(aggs[0].median_profit_abs, 2);
  EXPECT_DOUBLE_EQ(aggs[0].median_profit_pct, 20);
  EXPECT_EQ(aggs[0].event_count, 3u);
  auto even = aggregate(estimates_with_abs({4, 1, 3, 2}));
  EXPECT_DOUBLE_EQ(even[0].median_profit_abs, 2.5);
  EXPECT_DOUBLE_EQ(even[0].abs_percentiles.p25, 1.75);
  auto one = aggregate(estimates_with_abs({5}));
  EXPECT_EQ(one[0].avg_profit_abs, 5);
  EXPECT_EQ(one[0].median_profit_abs, 5);
  EXPECT_EQ(one[0].abs_percentiles.p95, 5);
  EXPECT_THROW(aggregate(std::span<const ProfitEstimate>{}), Error);
}

TEST(Aggregate, OrderIndependentAndMediansWithinQuartiles) {
  std::mt19937_64 rng(8);
  std::vector<EventProfit> events;
  for (int i = 0; i < 301; ++i) events.push_back(estimate_all(random_inputs(rng)));
  auto a = aggregate(std::span<const EventProfit>(events));
  std::shuffle(events.begin(), events.end(), rng);
  auto b = aggregate(std::span<const EventProfit>(events));
  ASSERT_EQ(a.size(), 4u);
  for (int s = 0; s < 4; ++s) {
    EXPECT_EQ(a[s].avg_profit_abs, b[s].avg_profit_abs);
    EXPECT_EQ(a[s].median_profit_pct, b[s].median_profit_pct);
    EXPECT_EQ(a[s].abs_percentiles.p5, b[s].abs_percentiles.p5);
    EXPECT_EQ(a[s].event_count, 301u);
    EXPECT_LE(a[s].abs_percentiles.p25, a[s].median_profit_abs);
    EXPECT_LE(a[s].median_profit_abs, a[s].abs_percentiles.p75);
    EXPECT_LE(a[s].pct_percentiles.p25, a[s].median_profit_pct);
    EXPECT_LE(a[s].median_profit_pct, a[s].pct_percentiles.p75);
  }
}

TEST(ProfitGroundTruth, SyntheticEventRecovery) {
  synth::SynthConfig cfg;
  cfg.spike_count = 4;
  cfg.accumulation_span_minutes = 1500;
  cfg.insider_volume_total = 12345.678;
  cfg.sparsity = 0.93;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    cfg.seed = seed;
    auto ev = synth::generate_event(cfg, kKey);
    auto in = profit_inputs(ev.window, span_of(ev.window));
    EXPECT_EQ(in.accumulated_volume, ev.truth.true_total_volume);
    EXPECT_NEAR(in.accumulated_volume, 12345.678, 1e-6);
    EXPECT_EQ(in.first_trade_price, *ev.truth.true_entry_price);
    EXPECT_EQ(in.peak_high, ev.truth.true_peak_high);
  }
}

}  // namespace
}  // namespace pumpscope
