// pumpscope: accumulation-phase and insider-profit forensics for pump-and-dump events.
//
//   pumpscope synth   --count 485 --seed 1 --output-dir corpus/
//   pumpscope analyze --manifest-path corpus/manifest.csv --output-dir report/
//   pumpscope fetch   --manifest-path events.csv --output-dir data/
//
// Exit codes: 0 success, 1 completed with skips, 2 usage/config error, 3 I/O or network failure.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pumpscope/pumpscope.hpp"

namespace {

using namespace pumpscope;

std::mutex log_mu;

void log_line(const std::string& msg) {
  std::lock_guard lock(log_mu);
  std::cerr << "[pumpscope] " << msg << '\n';
}

int exit_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Config:
    case ErrorKind::Parse:
    case ErrorKind::Duplicate:
    case ErrorKind::Validation:
      return kExitUsage;
    default:
      return kExitIo;
  }
}

synth::ArchetypeMix parse_mix(const std::string& text) {
  std::vector<double> parts;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    std::string field = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    double x = 0;
    if (!detail::parse_double(detail::trim(field), x)) throw Error(ErrorKind::Config, "bad --mix value '" + field + "'");
    parts.push_back(x);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (parts.size() != 3) throw Error(ErrorKind::Config, "--mix takes three proportions: pre,on_the_spot,dormant");
  synth::ArchetypeMix mix{parts[0], parts[1], parts[2]};
  mix.validate();
  return mix;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Accumulation-phase and insider-profit forensics for pump-and-dump events"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic event corpus with ground truth");
  std::size_t count = 485;
  std::string mix_text = "0.5,0.193,0.307";
  std::uint64_t seed = 1;
  std::string synth_out;
  double sparsity = 0.0;
  std::optional<double> last_hour_fraction;
  synth_cmd->add_option("-n,--count", count, "Number of events")->capture_default_str();
  synth_cmd->add_option("--mix", mix_text, "Archetype proportions pre_accumulated,on_the_spot,dormant_control")
      ->capture_default_str();
  synth_cmd->add_option("--seed", seed, "Corpus seed")->capture_default_str();
  synth_cmd->add_option("--output-dir", synth_out, "Corpus directory")->required();
  synth_cmd->add_option("--sparsity", sparsity, "Fraction of filler minutes without a candle")->capture_default_str();
  synth_cmd->add_option("--last-hour-volume-fraction", last_hour_fraction,
                        "Share of insider volume in the final spike, fixed for all events");

  // analyze
  auto* analyze_cmd = app.add_subcommand("analyze", "Detect accumulation spans and estimate insider profits");
  RunConfig run;
  std::string manifest_path, data_dir, output_dir, vwap_field = "close";
  std::vector<std::int64_t> horizons{60};
  analyze_cmd->add_option("--manifest-path,--manifest", manifest_path, "Manifest CSV (symbol,target_date)")->required();
  analyze_cmd->add_option("--data-dir", data_dir, "Directory of per-event candle CSVs (default: <manifest dir>/candles)");
  analyze_cmd->add_option("--output-dir", output_dir, "Report directory")->required();
  analyze_cmd->add_option("--archetype-threshold-minutes", run.archetype_threshold_minutes)->capture_default_str();
  analyze_cmd->add_option("--histogram-bin-minutes", run.histogram_bin_minutes)->capture_default_str();
  analyze_cmd->add_option("--vwap-price-field", vwap_field)
      ->check(CLI::IsMember({"close", "typical"}))
      ->capture_default_str();
  analyze_cmd->add_option("--concentration-horizons", horizons, "Minutes before target, comma separated")
      ->delimiter(',')
      ->capture_default_str();
  analyze_cmd->add_option("--jobs", run.jobs, "Worker threads")->capture_default_str();

  // fetch
  auto* fetch_cmd = app.add_subcommand("fetch", "Download minute candles for every manifest event");
  SourceConfig source;
  std::string fetch_manifest, fetch_out, base_url;
  std::int64_t timeout_ms = source.timeout.count();
  unsigned fetch_jobs = 1;
  fetch_cmd->add_option("--manifest-path,--manifest", fetch_manifest, "Manifest CSV")->required();
  fetch_cmd->add_option("--output-dir", fetch_out, "Directory for per-event candle CSVs")->required();
  fetch_cmd->add_option("--base-url", base_url, "API base URL (default: $PUMPSCOPE_BASE_URL or " + source.base_url + ")");
  fetch_cmd->add_option("--requests-per-second", source.requests_per_second)->capture_default_str();
  fetch_cmd->add_option("--max-candles-per-request", source.max_candles_per_request)->capture_default_str();
  fetch_cmd->add_option("--retry-limit", source.retry_limit)->capture_default_str();
  fetch_cmd->add_option("--timeout-ms", timeout_ms)->capture_default_str();
  fetch_cmd->add_option("--jobs", fetch_jobs, "Concurrent downloads")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  auto started = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::to_string(std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count()) + " ms";
  };

  try {
    if (*synth_cmd) {
      synth::CorpusConfig cc;
      cc.n = count;
      cc.mix = parse_mix(mix_text);
      cc.seed = seed;
      cc.sparsity = sparsity;
      cc.last_hour_volume_fraction = last_hour_fraction;
      auto paths = synth::write_corpus(cc, synth_out);
      log_line("wrote " + std::to_string(count) + " events to " + paths.manifest.parent_path().string() + " in " + elapsed());
      return kExitOk;
    }

    if (*analyze_cmd) {
      run.manifest_path = manifest_path;
      run.data_dir = data_dir.empty() ? run.manifest_path.parent_path() / "candles" : std::filesystem::path(data_dir);
      run.output_dir = output_dir;
      run.vwap_price_field = vwap_field == "typical" ? VwapPriceField::Typical : VwapPriceField::Close;
      run.concentration_horizons = horizons;
      auto s = run_analyze(run, log_line);
      log_line("events " + std::to_string(s.events) + ", analyzed " + std::to_string(s.analyzed) + ", data skips " +
               std::to_string(s.data_skips) + ", profit events " + std::to_string(s.profit_events) +
               ", profit skips " + std::to_string(s.profit_skips) + " in " + elapsed());
      return s.exit_code;
    }

    if (*fetch_cmd) {
      source = with_env_overrides(source);
      if (!base_url.empty()) source.base_url = base_url;
      source.timeout = std::chrono::milliseconds{timeout_ms};
      auto manifest = load_manifest(fetch_manifest);
      auto s = run_fetch(manifest, source, fetch_out, fetch_jobs, log_line);
      log_line("fetched " + std::to_string(s.fetched) + ", already present " + std::to_string(s.resumed) +
               ", failed " + std::to_string(s.failures.size()) + " in " + elapsed());
      return s.failures.empty() ? kExitOk : kExitIo;
    }
  } catch (const Error& e) {
    log_line(std::string("error: ") + e.what());
    return exit_for(e);
  } catch (const std::filesystem::filesystem_error& e) {
    log_line(std::string("error: ") + e.what());
    return kExitIo;
  }
  return kExitUsage;
}
