// ppe: longitudinal power profile estimation from simulated or captured
// coherent-receiver signals.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include "ppe/artifacts.hpp"
#include "ppe/config.hpp"
#include "ppe/errors.hpp"
#include "ppe/iq_capture.hpp"
#include "ppe/parallel.hpp"
#include "ppe/pipeline.hpp"

namespace fs = std::filesystem;
using namespace ppe;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 0;
  std::string format = "csv";
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "scenario file")->required();
  sub->add_option("--out", c.out, "output directory (default: scenario output_dir or out/<name>)");
  sub->add_option("--seed", c.seed, "override the scenario seed");
  sub->add_option("--threads", c.threads, "worker threads, 0 = all cores");
  sub->add_option("--format", c.format, "artifact format")->check(CLI::IsMember({"csv", "json"}));
}

ScenarioConfig load(const Common& c) {
  ScenarioConfig cfg = load_scenario(c.config);
  if (c.seed) cfg.set_seed(*c.seed);
  set_worker_threads(c.threads);
  return cfg;
}

fs::path out_dir(const Common& c, const ScenarioConfig& cfg) {
  if (!c.out.empty()) return c.out;
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  return fs::path("out") / cfg.name;
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

OutputFormat format_of(const Common& c) { return c.format == "json" ? OutputFormat::json : OutputFormat::csv; }

std::map<std::string, double> timing_map(const Timings& t) {
  return {{"simulate", t.simulate_s}, {"estimate", t.estimate_s}, {"analyze", t.analyze_s}};
}

void report(const PipelineResult& r) {
  if (r.ls_rms_db) std::printf("LS RMS error vs theory: %.3f dB\n", *r.ls_rms_db);
  if (r.cm_rms_db) std::printf("CM RMS error (offset-calibrated): %.3f dB\n", *r.cm_rms_db);
  if (r.conditioning)
    std::printf("metric %.2f, cond(G) %.3g -> %s\n", r.conditioning->metric, r.conditioning->cond_g,
                r.conditioning->stable_observed ? "stable" : "UNSTABLE");
  if (r.anomaly)
    for (const auto& e : r.anomaly->events)
      std::printf("anomaly at %.2f km, estimated loss %.2f dB\n", e.z_m / 1e3, e.estimated_loss_db);
}

int cmd_run(const Common& c) {
  const ScenarioConfig cfg = load(c);
  const PipelineResult r = run_pipeline(cfg);
  const fs::path dir = out_dir(c, cfg);
  make_dir(dir);
  const auto files = write_pipeline_artifacts(dir, r, cfg, format_of(c));
  write_manifest(dir, "run", cfg, r.seeds, timing_map(r.timings), files);
  report(r);
  std::printf("artifacts written to %s\n", dir.string().c_str());
  return kExitOk;
}

int cmd_simulate(const Common& c) {
  const ScenarioConfig cfg = load(c);
  double seconds = 0.0;
  const Captures cap = simulate_captures(cfg, &seconds);
  const fs::path dir = out_dir(c, cfg);
  make_dir(dir);
  write_iq(dir / "tx.iq", cap.tx);
  write_iq(dir / "rx.iq", cap.rx);
  std::vector<std::uint64_t> seeds;
  for (std::size_t f = 0; f < cfg.estimation.frames; ++f) seeds.push_back(frame_seed(cfg, f));
  write_manifest(dir, "simulate", cfg, seeds, {{"simulate", seconds}},
                 {"tx.iq", "tx.iq.json", "rx.iq", "rx.iq.json"});
  std::printf("captures written to %s\n", dir.string().c_str());
  return kExitOk;
}

int cmd_estimate(const Common& c, const std::string& tx, const std::string& rx) {
  const ScenarioConfig cfg = load(c);
  const PipelineResult r = estimate_from_files(cfg, tx, rx);
  const fs::path dir = out_dir(c, cfg);
  make_dir(dir);
  const auto files = write_pipeline_artifacts(dir, r, cfg, format_of(c));
  write_manifest(dir, "estimate", cfg, r.seeds, timing_map(r.timings), files);
  report(r);
  return kExitOk;
}

int cmd_analyze(const Common& c, const std::string& profile_path) {
  const ScenarioConfig cfg = load(c);
  PipelineResult r;
  const ProfileEstimate p = read_profile_json(profile_path);
  if (p.method == Method::cm) r.cm = p;
  else if (p.method == Method::ls) r.ls = p;
  else r.ls_augmented = p;
  ScenarioConfig acfg = cfg;
  acfg.analysis.detect = true;
  analyze(r, acfg, cfg.link());
  const fs::path dir = out_dir(c, cfg);
  make_dir(dir);
  const auto files = write_pipeline_artifacts(dir, r, cfg, format_of(c));
  write_manifest(dir, "analyze", cfg, p.seeds, timing_map(r.timings), files);
  report(r);
  return kExitOk;
}

int cmd_sweep(const Common& c) {
  const ScenarioConfig cfg = load(c);
  if (!cfg.sweep) throw ConfigError("the scenario has no [sweep] section");
  const auto t0 = std::chrono::steady_clock::now();
  auto reports = condition_sweep(*cfg.sweep);
  for (auto& r : reports) {
    r.stable_predicted = r.metric < cfg.analysis.stability_metric_threshold;
    r.stable_observed = r.cond_g < cfg.analysis.condition_threshold;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const fs::path dir = out_dir(c, cfg);
  make_dir(dir);
  const ArtifactStamp s = stamp_for(cfg);
  const std::string name = c.format == "json" ? "conditioning.json" : "conditioning.csv";
  if (c.format == "json") write_conditioning_json(dir / name, reports, s);
  else write_conditioning_csv(dir / name, reports, s);
  write_manifest(dir, "sweep", cfg, {cfg.seed}, {{"sweep", secs}}, {name});
  for (const auto& r : reports)
    std::printf("%-8s beta2 %6.1f  BW %5.0f GHz  dz %5.2f km  metric %9.3f  cond %.3g\n", to_string(r.format).c_str(),
                r.beta2_s2_per_m * 1e27, r.bandwidth_hz / 1e9, r.dz_m / 1e3, r.metric, r.cond_g);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fiber-longitudinal power profile estimation"};
  app.set_version_flag("--version", std::string(PPE_VERSION));
  app.require_subcommand(1);

  Common run, sim, est, ana, swp;
  std::string tx_path, rx_path, profile_path;
  auto* s_run = app.add_subcommand("run", "simulate, estimate and analyze a scenario");
  add_common(s_run, run);
  auto* s_sim = app.add_subcommand("simulate", "write tx/rx IQ captures for a scenario");
  add_common(s_sim, sim);
  auto* s_est = app.add_subcommand("estimate", "estimate a profile from tx/rx IQ captures");
  add_common(s_est, est);
  s_est->add_option("--tx", tx_path, "transmitted capture")->required();
  s_est->add_option("--rx", rx_path, "received capture")->required();
  auto* s_ana = app.add_subcommand("analyze", "error and anomaly analysis of a profile JSON");
  add_common(s_ana, ana);
  s_ana->add_option("--profile", profile_path, "profile JSON written with --format json")->required();
  auto* s_swp = app.add_subcommand("sweep", "condition-number sweep");
  add_common(s_swp, swp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*s_run) return cmd_run(run);
    if (*s_sim) return cmd_simulate(sim);
    if (*s_est) return cmd_estimate(est, tx_path, rx_path);
    if (*s_ana) return cmd_analyze(ana, profile_path);
    if (*s_swp) return cmd_sweep(swp);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const SingularSystemError& e) {
    std::cerr << "singular system: " << e.what() << '\n';
    return kExitSingular;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const SyncError& e) {
    std::cerr << "sync error: " << e.what() << '\n';
    return kExitSync;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitGeneric;
  }
  return kExitGeneric;
}
