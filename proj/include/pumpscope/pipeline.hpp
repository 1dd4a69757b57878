#pragma once

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "pumpscope/accumulation.hpp"
#include "pumpscope/fetch.hpp"
#include "pumpscope/ingestion.hpp"
#include "pumpscope/profit.hpp"
#include "pumpscope/report.hpp"

namespace pumpscope {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitWithSkips = 1,
  kExitUsage = 2,
  kExitIo = 3,
};

using LogFn = std::function<void(const std::string&)>;

namespace detail {

// Runs fn(i) for i in [0, n) on up to `jobs` threads.
inline void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

inline std::string quote_asset(const std::string& symbol) {
  auto pos = symbol.rfind('_');
  return pos == std::string::npos ? std::string() : symbol.substr(pos + 1);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// analyze

struct RunConfig {
  std::filesystem::path manifest_path;
  std::filesystem::path data_dir;
  std::filesystem::path output_dir;
  std::int64_t archetype_threshold_minutes = kDefaultArchetypeThresholdMinutes;
  std::int64_t histogram_bin_minutes = 60;
  VwapPriceField vwap_price_field = VwapPriceField::Close;
  std::vector<std::int64_t> concentration_horizons{60};
  unsigned jobs = 1;

  void validate() const {
    if (manifest_path.empty()) throw Error(ErrorKind::Config, "manifest path is required");
    if (!std::filesystem::is_regular_file(manifest_path)) {
      throw Error(ErrorKind::Config, "manifest not found: " + manifest_path.string());
    }
    if (!std::filesystem::is_directory(data_dir)) throw Error(ErrorKind::Config, "data dir not found: " + data_dir.string());
    if (output_dir.empty()) throw Error(ErrorKind::Config, "output dir is required");
    if (archetype_threshold_minutes < 1) throw Error(ErrorKind::Config, "archetype threshold must be >= 1");
    if (histogram_bin_minutes < 1) throw Error(ErrorKind::Config, "histogram bin width must be >= 1");
    if (concentration_horizons.empty()) throw Error(ErrorKind::Config, "at least one concentration horizon is required");
    for (auto h : concentration_horizons) {
      if (h < 1) throw Error(ErrorKind::Config, "concentration horizons must be >= 1");
    }
    if (jobs < 1) throw Error(ErrorKind::Config, "jobs must be >= 1");
  }
};

struct EventAnalysis {
  EventKey key;
  bool analyzed = false;
  std::string data_skip_reason;
  AccumulationSpan span;
  Archetype archetype = Archetype::OnTheSpot;
  std::vector<ConcentrationParts> concentration;  // one per configured horizon
  std::optional<EventProfit> profit;
  std::string profit_skip_reason;
};

inline EventAnalysis analyze_window(const EventWindow& w, const RunConfig& cfg) {
  EventAnalysis a;
  a.key = w.key();
  a.analyzed = true;
  a.span = compute_accumulation_span(w);
  a.archetype = classify_archetype(a.span, w, cfg.archetype_threshold_minutes);
  for (auto h : cfg.concentration_horizons) a.concentration.push_back(concentration_parts(w, h));
  if (!a.span) {
    a.profit_skip_reason = "no_accumulation: no pre-pump candle with quantity > 0";
    return a;
  }
  try {
    a.profit = run_event(w, a.span, cfg.vwap_price_field);
  } catch (const Error& e) {
    a.profit_skip_reason = std::string(to_string(e.kind())) + ": " + e.what();
  }
  return a;
}

inline EventAnalysis analyze_event(const EventKey& key, const RunConfig& cfg) {
  auto path = cfg.data_dir / event_file_name(key);
  if (!std::filesystem::exists(path)) {
    EventAnalysis a;
    a.key = key;
    a.data_skip_reason = "missing_data_file: " + path.filename().string();
    return a;
  }
  try {
    auto candles = load_candles_csv(path);
    return analyze_window(slice_window(candles, key), cfg);
  } catch (const Error& e) {
    EventAnalysis a;
    a.key = key;
    a.data_skip_reason = std::string("invalid_data: ") + to_string(e.kind()) + ": " + e.what();
    return a;
  }
}

struct AnalyzeSummary {
  std::size_t events = 0;
  std::size_t analyzed = 0;
  std::size_t data_skips = 0;
  std::size_t profit_events = 0;
  std::size_t profit_skips = 0;
  int exit_code = kExitOk;
};

struct ReportBundle {
  std::vector<std::pair<std::string, std::string>> files;  // name, content
  AnalyzeSummary summary;
};

// Builds every report from per-event results; rows ordered by (symbol, target_date).
inline ReportBundle build_reports(std::vector<EventAnalysis> results, const RunConfig& cfg) {
  std::sort(results.begin(), results.end(), [](const auto& a, const auto& b) { return a.key < b.key; });
  ReportBundle bundle;
  auto& sum = bundle.summary;
  sum.events = results.size();

  std::vector<report::SpanRow> span_rows;
  std::vector<AccumulationSpan> spans;
  std::vector<report::ProfitRow> profit_rows;
  std::vector<ProfitEstimate> estimates;
  std::vector<report::ConcentrationRow> conc_rows;
  std::vector<report::SkipRow> skips;
  std::set<std::string> quotes;

  for (const auto& r : results) {
    if (!r.analyzed) {
      ++sum.data_skips;
      skips.push_back({r.key, "data", r.data_skip_reason});
      continue;
    }
    ++sum.analyzed;
    span_rows.push_back({r.key, r.span, r.archetype});
    spans.push_back(r.span);
    for (std::size_t h = 0; h < cfg.concentration_horizons.size(); ++h) {
      conc_rows.push_back({r.key, cfg.concentration_horizons[h], r.concentration[h]});
    }
    if (r.profit) {
      ++sum.profit_events;
      quotes.insert(detail::quote_asset(r.key.symbol));
      for (const auto& e : r.profit->estimates) {
        profit_rows.push_back({r.key, e});
        estimates.push_back(e);
      }
    } else {
      ++sum.profit_skips;
      skips.push_back({r.key, "profit", r.profit_skip_reason});
    }
  }

  auto prev = prevalence(spans);
  std::optional<SpanStats> st;
  if (prev.with_accumulation > 0) st = span_stats(spans);
  auto hist = span_histogram(spans, cfg.histogram_bin_minutes);
  std::vector<ScenarioAggregate> aggs;
  if (!estimates.empty()) aggs = aggregate(estimates);
  std::vector<report::ConcentrationAggregate> conc_aggs;
  for (auto h : cfg.concentration_horizons) conc_aggs.push_back(report::aggregate_concentration(conc_rows, h));

  bundle.files.emplace_back("spans.csv", report::spans_csv(span_rows));
  bundle.files.emplace_back("prevalence.csv", report::prevalence_csv(prev));
  bundle.files.emplace_back("span_stats.csv", report::span_stats_csv(st));
  bundle.files.emplace_back("histogram.csv", report::histogram_csv(hist));
  bundle.files.emplace_back("profits_per_event.csv", report::profits_per_event_csv(profit_rows));
  bundle.files.emplace_back("profits_aggregate.csv", report::profits_aggregate_csv(aggs));
  bundle.files.emplace_back("concentration.csv", report::concentration_csv(conc_rows));
  bundle.files.emplace_back("concentration_aggregate.csv", report::concentration_aggregate_csv(conc_aggs));
  bundle.files.emplace_back("skips.csv", report::skips_csv(skips));

  using nlohmann::ordered_json;
  ordered_json j;
  j["tool"] = "pumpscope";
  j["version"] = kVersion;
  j["config"] = {
      {"manifest_path", cfg.manifest_path.string()},
      {"data_dir", cfg.data_dir.string()},
      {"archetype_threshold_minutes", cfg.archetype_threshold_minutes},
      {"histogram_bin_minutes", cfg.histogram_bin_minutes},
      {"vwap_price_field", std::string(to_string(cfg.vwap_price_field))},
      {"concentration_horizons", cfg.concentration_horizons},
  };
  j["counts"] = {{"events", sum.events},
                 {"analyzed", sum.analyzed},
                 {"data_skips", sum.data_skips},
                 {"profit_events", sum.profit_events},
                 {"profit_skips", sum.profit_skips}};
  j["prevalence"] = {{"total_events", prev.total_events},
                     {"with_accumulation", prev.with_accumulation},
                     {"without_accumulation", prev.without_accumulation},
                     {"with_pct", prev.with_pct},
                     {"without_pct", prev.without_pct}};
  if (st) {
    j["span_stats"] = {{"count", st->count}, {"minimum", st->minimum}, {"average", st->average},
                       {"maximum", st->maximum}, {"std_dev", st->std_dev}};
  } else {
    j["span_stats"] = nullptr;
  }
  ordered_json scen = ordered_json::array();
  for (const auto& a : aggs) {
    scen.push_back({{"scenario", std::string(1, to_char(a.scenario))},
                    {"event_count", a.event_count},
                    {"avg_profit_abs", a.avg_profit_abs},
                    {"median_profit_abs", a.median_profit_abs},
                    {"avg_profit_pct", a.avg_profit_pct},
                    {"median_profit_pct", a.median_profit_pct}});
  }
  j["scenarios"] = scen;
  j["quote_assets"] = quotes;
  j["mixed_quote_aggregation"] = quotes.size() > 1;
  bundle.files.emplace_back("summary.json", j.dump(2) + "\n");

  sum.exit_code = sum.data_skips > 0 ? kExitWithSkips : kExitOk;
  return bundle;
}

inline AnalyzeSummary run_analyze(const RunConfig& cfg, const LogFn& log = {}) {
  cfg.validate();
  auto manifest = load_manifest(cfg.manifest_path);
  std::vector<EventAnalysis> results(manifest.entries.size());
  std::atomic<std::size_t> done{0};
  detail::parallel_for(manifest.entries.size(), cfg.jobs, [&](std::size_t i) {
    results[i] = analyze_event(manifest.entries[i], cfg);
    std::size_t d = ++done;
    if (log && (d % 100 == 0 || d == results.size())) {
      log("analyzed " + std::to_string(d) + "/" + std::to_string(results.size()) + " events");
    }
  });
  auto bundle = build_reports(std::move(results), cfg);
  std::filesystem::create_directories(cfg.output_dir);
  for (const auto& [name, content] : bundle.files) atomic_write_file(cfg.output_dir / name, content);
  return bundle.summary;
}

// ---------------------------------------------------------------------------
// fetch

struct FetchSummary {
  std::size_t fetched = 0;
  std::size_t resumed = 0;
  std::vector<std::pair<EventKey, std::string>> failures;
};

// One candle file per event covering its whole window. Existing files are kept,
// so an interrupted run can be resumed.
inline FetchSummary run_fetch(const EventManifest& manifest, const SourceConfig& cfg,
                              const std::filesystem::path& out_dir, unsigned jobs = 1, const LogFn& log = {}) {
  cfg.validate();
  std::filesystem::create_directories(out_dir);
  RateLimiter limiter(cfg.requests_per_second);
  std::vector<int> status(manifest.entries.size(), 0);  // 0 fetched, 1 resumed, 2 failed
  std::vector<std::string> errors(manifest.entries.size());
  detail::parallel_for(manifest.entries.size(), jobs, [&](std::size_t i) {
    const auto& key = manifest.entries[i];
    auto path = out_dir / event_file_name(key);
    if (std::filesystem::exists(path)) {
      status[i] = 1;
      return;
    }
    try {
      auto candles = fetch_candles(cfg, limiter, key.symbol, window_start(key), window_end(key) + Minutes{1});
      write_candles_csv(path, candles);
      if (log) log("fetched " + key.symbol + " " + format_iso8601(key.target_date) + ": " +
                   std::to_string(candles.size()) + " candles");
    } catch (const std::exception& e) {
      status[i] = 2;
      errors[i] = e.what();
      if (log) log("FAILED " + key.symbol + " " + format_iso8601(key.target_date) + ": " + e.what());
    }
  });
  FetchSummary s;
  for (std::size_t i = 0; i < status.size(); ++i) {
    if (status[i] == 0) ++s.fetched;
    if (status[i] == 1) ++s.resumed;
    if (status[i] == 2) s.failures.emplace_back(manifest.entries[i], errors[i]);
  }
  return s;
}

}  // namespace pumpscope
