#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "pumpscope/accumulation.hpp"
#include "pumpscope/synth.hpp"
#include "support/oracles.hpp"

namespace pumpscope {
namespace {

const Instant kT = from_epoch_ms(1733061600000);
const EventKey kKey{"BTC_X", kT};

Candle at(std::int64_t minute, double q, double price = 1.0) {
  return {kT + Minutes{minute}, price, price, price, price, q};
}

TEST(ComputeSpan, PrePumpSpikes) {
  EventWindow w(kKey, {at(-400, 0), at(-300, 5), at(-100, 0), at(-10, 2), at(0, 50), at(3, 9)});
  auto s = compute_accumulation_span(w);
  ASSERT_TRUE(s);
  EXPECT_EQ(*s.start(), kT - Minutes{300});
  EXPECT_EQ(*s.end(), kT - Minutes{10});
}

TEST(ComputeSpan, OnlyPostTargetVolumeIsAbsent) {
  EventWindow w(kKey, {at(-100, 0), at(0, 10), at(1, 20)});
  EXPECT_FALSE(compute_accumulation_span(w));
  EXPECT_FALSE(compute_accumulation_span(EventWindow(kKey, {})));
}

TEST(ComputeSpan, MatchesBruteForceOracleOnRandomWindows) {
  std::mt19937_64 rng(2024);
  const double densities[] = {1.0, 0.5, 0.07, 0.005};
  const double activity[] = {0.0, 0.0005, 0.01, 0.3};
  int n = 0;
  for (double d : densities) {
    for (double a : activity) {
      for (int i = 0; i < 70; ++i, ++n) {
        EventKey key{"R_USDT", kT + Minutes{n}};
        auto w = testing::random_window(rng, key, d, a);
        std::vector<Candle> all(w.candles().begin(), w.candles().end());
        ASSERT_TRUE(testing::span_matches(compute_accumulation_span(w), testing::brute_force_span(all, key.target_date)))
            << "density " << d << " activity " << a;
      }
    }
  }
  EXPECT_GE(n, 1000);
}

TEST(SpanMinutes, Conventions) {
  EXPECT_EQ(span_minutes(AccumulationSpan(kT - Minutes{5}, kT - Minutes{5})), 1);
  EXPECT_EQ(span_minutes(AccumulationSpan(kT - Minutes{100}, kT - Minutes{40})), 60);
  EXPECT_FALSE(span_minutes(AccumulationSpan{}));
}

TEST(SpanMinutes, SingleSpikeSyntheticEvent) {
  synth::SynthConfig cfg;
  cfg.archetype = synth::Archetype::OnTheSpot;
  cfg.spike_count = 1;
  cfg.accumulation_span_minutes = 0;
  auto ev = synth::generate_event(cfg, kKey);
  EXPECT_EQ(span_minutes(compute_accumulation_span(ev.window)), 1);
}

std::vector<AccumulationSpan> spans_of_minutes(std::initializer_list<std::int64_t> mins, int absent = 0) {
  std::vector<AccumulationSpan> out;
  for (auto m : mins) out.emplace_back(kT - Minutes{m + 10}, kT - Minutes{10});
  for (int i = 0; i < absent; ++i) out.emplace_back();
  return out;
}

TEST(Prevalence, TableOneCounts) {
  std::vector<AccumulationSpan> spans;
  for (int i = 0; i < 336; ++i) spans.emplace_back(kT - Minutes{20}, kT - Minutes{10});
  for (int i = 0; i < 149; ++i) spans.emplace_back();
  auto p = prevalence(spans);
  EXPECT_EQ(p.total_events, 485u);
  EXPECT_EQ(p.with_accumulation, 336u);
  EXPECT_EQ(p.without_accumulation, 149u);
  EXPECT_DOUBLE_EQ(p.with_pct, 69.3);
  EXPECT_DOUBLE_EQ(p.without_pct, 30.7);
}

TEST(Prevalence, EmptyAndSmall) {
  auto empty = prevalence({});
  EXPECT_EQ(empty.total_events, 0u);
  EXPECT_EQ(empty.with_pct, 0.0);
  EXPECT_EQ(empty.without_pct, 0.0);
  auto p = prevalence(spans_of_minutes({5}, 3));
  EXPECT_EQ(p.total_events, 4u);
  EXPECT_EQ(p.with_accumulation, 1u);
  EXPECT_DOUBLE_EQ(p.with_pct, 25.0);
  EXPECT_DOUBLE_EQ(p.without_pct, 75.0);
}

TEST(SpanStats, PopulationStatistics) {
  auto st = span_stats(spans_of_minutes({1, 3, 5}));
  EXPECT_EQ(st.minimum, 1);
  EXPECT_EQ(st.maximum, 5);
  EXPECT_DOUBLE_EQ(st.average, 3.0);
  EXPECT_NEAR(st.std_dev, std::sqrt(8.0 / 3.0), 1e-12);
  EXPECT_NEAR(st.std_dev, 1.632993, 1e-6);
  EXPECT_EQ(st.count, 3u);
}

TEST(SpanStats, SingleAndMixed) {
  auto one = span_stats(spans_of_minutes({7}));
  EXPECT_EQ(one.minimum, 7);
  EXPECT_EQ(one.maximum, 7);
  EXPECT_EQ(one.average, 7);
  EXPECT_EQ(one.std_dev, 0);
  auto mixed = span_stats(spans_of_minutes({1, 3, 5}, 4));
  EXPECT_EQ(mixed.count, 3u);
  EXPECT_DOUBLE_EQ(mixed.average, 3.0);
  EXPECT_THROW(span_stats(spans_of_minutes({}, 2)), Error);
}

TEST(Histogram, Binning) {
  auto h = span_histogram(spans_of_minutes({1, 2, 61}), 60);
  ASSERT_EQ(h.bins.size(), 2u);
  EXPECT_EQ(h.bins[0], (HistogramBin{0, 2}));
  EXPECT_EQ(h.bins[1], (HistogramBin{60, 1}));
  EXPECT_TRUE(span_histogram({}, 60).bins.empty());
  EXPECT_THROW(span_histogram({}, 0), Error);
}

TEST(Histogram, ConservationAcrossWidths) {
  auto spans = spans_of_minutes({1, 2, 61, 300, 5873, 42}, 5);
  auto count = [](const Histogram& h) {
    std::size_t n = 0;
    for (auto& b : h.bins) n += b.count;
    return n;
  };
  auto st = span_stats(spans);
  for (std::int64_t w : {1, 7, 60, 1440, 10000}) {
    auto h = span_histogram(spans, w);
    EXPECT_EQ(count(h), st.count);
    for (std::size_t i = 0; i < h.bins.size(); ++i) EXPECT_EQ(h.bins[i].lower_bound_minutes, static_cast<std::int64_t>(i) * w);
  }
}

TEST(SpikeDelays, AscendingByDelay) {
  EventWindow w(kKey, {at(-120, 3), at(-60, 0), at(-1, 7), at(0, 100)});
  auto d = spike_delays(w);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d[0], (SpikeDelay{1, 7}));
  EXPECT_EQ(d[1], (SpikeDelay{120, 3}));
  EXPECT_TRUE(spike_delays(EventWindow(kKey, {at(-5, 0), at(1, 4)})).empty());
}

TEST(SpikeDelays, RecoversGeneratorPlacement) {
  synth::SynthConfig cfg;
  cfg.spike_count = 6;
  cfg.accumulation_span_minutes = 3000;
  cfg.sparsity = 0.5;
  auto ev = synth::generate_event(cfg, kKey);
  auto d = spike_delays(ev.window);
  ASSERT_EQ(d.size(), 6u);
  EXPECT_EQ(kT - Minutes{d.front().delay_minutes}, *ev.truth.true_accum_end);
  EXPECT_EQ(kT - Minutes{d.back().delay_minutes}, *ev.truth.true_accum_start);
  for (const auto& s : d) EXPECT_GE(s.delay_minutes, 1);
}

TEST(VolumeConcentration, Examples) {
  EventWindow all_late(kKey, {at(-59, 4), at(-1, 6), at(0, 1000)});
  EXPECT_EQ(volume_concentration(all_late, 60), 1.0);
  EventWindow split(kKey, {at(-300, 3), at(-61, 0), at(-60, 7)});
  EXPECT_DOUBLE_EQ(*volume_concentration(split, 60), 0.7);
  EXPECT_DOUBLE_EQ(*volume_concentration(split, 59), 0.0);
  EXPECT_EQ(volume_concentration(split, 5760), 1.0);
  EXPECT_FALSE(volume_concentration(EventWindow(kKey, {at(-5, 0), at(0, 9)}), 60));
  EXPECT_THROW(volume_concentration(split, 0), Error);
}

TEST(VolumeConcentration, GeneratedSeventyPercent) {
  synth::SynthConfig cfg;
  cfg.spike_count = 8;
  cfg.accumulation_span_minutes = 4000;
  cfg.last_hour_volume_fraction = 0.70;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    cfg.seed = seed;
    auto ev = synth::generate_event(cfg, kKey);
    EXPECT_NEAR(*volume_concentration(ev.window, 60), 0.70, 1e-9);
  }
}

TEST(VolumeConcentration, MonotoneInHorizon) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) {
    auto w = testing::random_window(rng, {"M_USDT", kT + Minutes{i}}, 0.3, 0.05);
    double prev = 0;
    for (std::int64_t h = 1; h <= 5760; h += 97) {
      auto c = volume_concentration(w, h);
      ASSERT_TRUE(c);
      EXPECT_GE(*c, prev);
      prev = *c;
    }
    EXPECT_EQ(volume_concentration(w, 5760), 1.0);
  }
}

TEST(ClassifyArchetype, Rules) {
  EventWindow w(kKey, {at(-4320, 1), at(-30, 1)});
  EXPECT_EQ(classify_archetype(AccumulationSpan{}, w), Archetype::OnTheSpot);
  EXPECT_EQ(classify_archetype(AccumulationSpan(kT - Minutes{4320}, kT - Minutes{30}), w), Archetype::PreAccumulated);
  EXPECT_EQ(classify_archetype(AccumulationSpan(kT - Minutes{30}, kT - Minutes{30}), w, 60), Archetype::OnTheSpot);
  EXPECT_EQ(classify_archetype(AccumulationSpan(kT - Minutes{60}, kT - Minutes{1}), w, 60), Archetype::OnTheSpot);
  EXPECT_EQ(classify_archetype(AccumulationSpan(kT - Minutes{61}, kT - Minutes{1}), w, 60), Archetype::PreAccumulated);
  EXPECT_EQ(classify_archetype(AccumulationSpan(kT - Minutes{61}, kT - Minutes{1}), w, 120), Archetype::OnTheSpot);
}

TEST(ClassifyArchetype, AgreesWithGeneratorLabels) {
  synth::CorpusConfig cc;
  cc.n = 120;
  cc.mix = {0.4, 0.4, 0.2};
  cc.seed = 9;
  cc.sparsity = 0.5;
  synth::generate_corpus(cc, [](const synth::CorpusEvent& e) {
    auto span = compute_accumulation_span(e.event.window);
    auto label = classify_archetype(span, e.event.window, 60);
    auto expected = e.archetype == synth::Archetype::PreAccumulated ? Archetype::PreAccumulated : Archetype::OnTheSpot;
    EXPECT_EQ(label, expected) << synth::to_string(e.archetype);
  });
}

TEST(Accumulation, TargetMinuteNeverContributes) {
  EventWindow w(kKey, {at(-10, 5), at(0, 1e6)});
  auto s = compute_accumulation_span(w);
  EXPECT_EQ(*s.end(), kT - Minutes{10});
  EXPECT_EQ(spike_delays(w).size(), 1u);
  EXPECT_EQ(concentration_parts(w, 60).total, 5.0);
}

}  // namespace
}  // namespace pumpscope
