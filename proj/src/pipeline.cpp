#include "ppe/pipeline.hpp"

#include <chrono>
#include <cmath>

#include "ppe/errors.hpp"
#include "ppe/iq_capture.hpp"
#include "ppe/metrics.hpp"
#include "ppe/resample.hpp"
#include "ppe/simulator.hpp"
#include "ppe/source.hpp"

namespace ppe {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// G above this size is streamed in column blocks instead of materialized
constexpr std::size_t kMaterializeBytes = std::size_t{192} << 20;

}  // namespace

std::uint64_t frame_seed(const ScenarioConfig& config, std::size_t index) { return mix_seed(config.seed, 2 * index); }

Frame simulate_frame(const ScenarioConfig& config, const LinkSpec& link, std::size_t index) {
  const std::size_t sps = config.sim.sps;
  const std::size_t est_sps = config.estimation.samples_per_symbol;
  const std::size_t n_symbols = config.estimation.samples_per_frame / est_sps;
  SourceSpec src = config.source;
  src.seed = frame_seed(config, index);
  SimConfig sim = config.sim;
  sim.seed = mix_seed(config.seed, 2 * index + 1);

  Field tx = config.estimation.dual_pol ? Field(generate_dual_pol_source(src, n_symbols, sps).field)
                                        : Field(generate_source(src, n_symbols, sps).field);
  const SimResult res = propagate(tx, link, sim);
  if (sps % est_sps == 0) return {decimate(tx, sps / est_sps), decimate(res.rx, sps / est_sps), src.seed};
  return {resample(tx, n_symbols * est_sps), resample(res.rx, n_symbols * est_sps), src.seed};
}

Estimator::Estimator(const ScenarioConfig& config, const LinkSpec& link, bool dual_pol)
    : cfg_(config), link_(link), grid_(EstimationGrid::uniform(link, config.estimation.dz_m)), dual_pol_(dual_pol) {
  if (grid_.size() < 2) throw ConfigError("estimation grid needs at least two positions; decrease dz_km");
  solve_.ridge = config.estimation.ridge;
  solve_.stability_threshold = config.analysis.condition_threshold;
  const auto m = config.estimation.method;
  want_ls_ = m == MethodChoice::ls || m == MethodChoice::both;
  want_cm_ = m == MethodChoice::cm || m == MethodChoice::both;
  want_aug_ = m == MethodChoice::ls_augmented;
  if (config.estimation.averaging == Averaging::normal_equations) {
    joint_.emplace(grid_, dual_pol_);
    if (want_aug_) joint_aug_.emplace(grid_, dual_pol_);
  }
}

std::size_t Estimator::guard_samples(const Field& frame_tx) const {
  if (cfg_.estimation.guard_samples) return *cfg_.estimation.guard_samples;
  return default_guard_samples(link_, cfg_.source.bandwidth_hz(), field_sample_period(frame_tx));
}

void Estimator::add_frame(const Frame& frame) {
  const auto t0 = Clock::now();
  if (is_dual_pol(frame.tx) != dual_pol_) throw ConfigError("frame polarization differs from the configuration");
  guard_ = guard_samples(frame.tx);

  GBuildOptions go;
  go.nl_oversampling = cfg_.estimation.nl_oversampling;
  go.guard_samples = guard_;
  A1Options ao;
  ao.alignment = cfg_.estimation.alignment;
  ao.guard_samples = guard_;
  const ReceivedPerturbation a = form_a1(frame.rx, frame.tx, link_, ao);
  if (a.a1.squaredNorm() > kGrossResidualRatio * a.a0.squaredNorm())
    throw SyncError("received signal does not match the transmitted reference (gross residual)");

  const std::size_t rows = static_cast<std::size_t>(a.a1.size());
  const bool materialize = want_aug_ || 2 * rows * grid_.size() * sizeof(double) <= kMaterializeBytes;
  PerturbationSystem sys(grid_, dual_pol_);
  std::optional<PerturbationMatrix> g;
  if (materialize) {
    g.emplace(build_g(frame.tx, link_, grid_, go));
    if (want_ls_ || want_cm_) sys.accumulate(*g, a.a1);
  } else {
    sys.accumulate_streamed(frame.tx, link_, go, a.a1, 64);
  }

  if (joint_) {
    if (want_ls_ || want_cm_) joint_->merge(sys);
    if (want_aug_) joint_aug_->accumulate(*g, a.a0, a.rx);
  } else {
    if (want_ls_) {
      ls_.push_back(solve_ls(sys, solve_));
      ls_.back().seeds = {frame.seed};
    }
    if (want_cm_) {
      cm_.push_back(solve_cm(sys));
      cm_.back().seeds = {frame.seed};
    }
    if (want_aug_) {
      AugmentedSystem as(grid_, dual_pol_);
      as.accumulate(*g, a.a0, a.rx);
      auto r = solve_ls_augmented(as, solve_);
      r.profile.seeds = {frame.seed};
      aug_.push_back(std::move(r.profile));
      scales_.push_back(r.scale);
    }
  }
  seeds_.push_back(frame.seed);
  seconds_ += since(t0);
}

PipelineResult Estimator::finish() {
  PipelineResult out;
  out.seeds = seeds_;
  out.guard_samples = guard_;
  if (seeds_.empty()) throw std::invalid_argument("no frames were estimated");
  if (joint_) {
    if (want_ls_) out.ls = solve_ls(*joint_, solve_);
    if (want_cm_) out.cm = solve_cm(*joint_);
    if (want_aug_) {
      auto r = solve_ls_augmented(*joint_aug_, solve_);
      out.ls_augmented = r.profile;
      scales_.push_back(r.scale);
    }
    for (auto* p : {&out.ls, &out.cm, &out.ls_augmented})
      if (*p) (*p)->seeds = seeds_;
  } else {
    if (!ls_.empty()) out.ls = average_profiles(ls_);
    if (!cm_.empty()) out.cm = average_profiles(cm_);
    if (!aug_.empty()) out.ls_augmented = average_profiles(aug_);
  }
  out.augmented_scales = scales_;
  out.timings.estimate_s = seconds_;
  return out;
}

void analyze(PipelineResult& r, const ScenarioConfig& config, const LinkSpec& link) {
  const auto t0 = Clock::now();
  const ProfileEstimate* main = r.ls ? &*r.ls : r.ls_augmented ? &*r.ls_augmented : r.cm ? &*r.cm : nullptr;
  if (!main) return;
  r.theory = theoretical_profile(link, main->z_m);
  if (r.ls) r.ls_rms_db = profile_rms_error(*r.ls, link, config.analysis.anomaly.dead_zone_m);
  else if (r.ls_augmented) r.ls_rms_db = profile_rms_error(*r.ls_augmented, link, config.analysis.anomaly.dead_zone_m);
  if (r.cm) r.cm_rms_db = calibrated_rms_error(*r.cm, link, config.analysis.anomaly.dead_zone_m);

  if (!main->arbitrary_units) {
    ConditioningReport c;
    c.k = main->z_m.size();
    c.dz_m = main->dz_m;
    c.bandwidth_hz = config.source.bandwidth_hz();
    c.beta2_s2_per_m = link.spans().front().beta2_s2_per_m;
    c.format = config.source.format;
    c.metric = stability_metric(c.beta2_s2_per_m, c.bandwidth_hz, c.dz_m);
    c.cond_g = main->cond_g;
    c.stable_predicted = c.metric < config.analysis.stability_metric_threshold;
    c.stable_observed = c.cond_g < config.analysis.condition_threshold;
    r.conditioning = c;
  }
  if (config.analysis.detect && !main->arbitrary_units)
    r.anomaly = detect_anomalies(*main, link, config.analysis.anomaly);
  r.timings.analyze_s = since(t0);
}

PipelineResult run_pipeline(const ScenarioConfig& config) {
  const LinkSpec link = config.link();
  Estimator est(config, link, config.estimation.dual_pol);
  double sim_s = 0.0;
  for (std::size_t f = 0; f < config.estimation.frames; ++f) {
    const auto t0 = Clock::now();
    const Frame frame = simulate_frame(config, link, f);
    sim_s += since(t0);
    est.add_frame(frame);
  }
  PipelineResult r = est.finish();
  r.timings.simulate_s = sim_s;
  analyze(r, config, link);
  return r;
}

Captures simulate_captures(const ScenarioConfig& config, double* seconds) {
  const auto t0 = Clock::now();
  const LinkSpec link = config.link();
  Rails tx, rx;
  for (std::size_t f = 0; f < config.estimation.frames; ++f) {
    const Frame frame = simulate_frame(config, link, f);
    Rails a = to_rails(frame.tx), b = to_rails(frame.rx);
    if (f == 0) {
      tx = std::move(a);
      rx = std::move(b);
      continue;
    }
    for (std::size_t p = 0; p < a.rails.size(); ++p) {
      tx.rails[p].insert(tx.rails[p].end(), a.rails[p].begin(), a.rails[p].end());
      rx.rails[p].insert(rx.rails[p].end(), b.rails[p].begin(), b.rails[p].end());
    }
  }
  if (seconds) *seconds = since(t0);
  return {from_rails(std::move(tx)), from_rails(std::move(rx))};
}

std::vector<Frame> split_frames(const Captures& c, std::size_t spf) {
  const std::size_t n = field_size(c.tx);
  if (field_size(c.rx) != n) throw IoError("tx and rx captures differ in length");
  if (spf == 0 || n % spf) throw ConfigError("capture length is not a multiple of estimation.samples_per_frame");
  const Rails tx = to_rails(c.tx), rx = to_rails(c.rx);
  std::vector<Frame> out;
  for (std::size_t f = 0; f < n / spf; ++f) {
    auto cut = [&](const Rails& r) {
      Rails part{{}, r.sample_period, r.center_frequency};
      for (const auto& rail : r.rails)
        part.rails.emplace_back(rail.begin() + static_cast<std::ptrdiff_t>(f * spf),
                                rail.begin() + static_cast<std::ptrdiff_t>((f + 1) * spf));
      return from_rails(std::move(part));
    };
    out.push_back({cut(tx), cut(rx), 0});
  }
  return out;
}

PipelineResult estimate_from_files(const ScenarioConfig& config, const std::filesystem::path& tx_path,
                                   const std::filesystem::path& rx_path) {
  IqHeader htx, hrx;
  Field tx = read_iq(tx_path, &htx);
  Field rx = read_iq(rx_path, &hrx);
  if (htx.n_samples != hrx.n_samples || htx.dual_pol != hrx.dual_pol ||
      std::abs(htx.sample_period_s - hrx.sample_period_s) > 1e-12 * htx.sample_period_s ||
      htx.center_frequency_hz != hrx.center_frequency_hz)
    throw IoError("tx and rx capture headers do not match");
  const double expected_t = 1.0 / (config.source.symbol_rate_hz * static_cast<double>(config.estimation.samples_per_symbol));
  if (std::abs(htx.sample_period_s - expected_t) > 1e-6 * expected_t)
    throw ConfigError("captures are not at estimation.samples_per_symbol of the configured symbol rate");

  const LinkSpec link = config.link();
  const auto t0 = Clock::now();
  const SyncResult s = synchronize(rx, tx, link, field_size(rx) / 2);
  if (s.lag != 0) rx = shift_field(rx, s.lag);
  const double sync_s = since(t0);

  Estimator est(config, link, htx.dual_pol);
  for (const Frame& f : split_frames({tx, rx}, config.estimation.samples_per_frame)) est.add_frame(f);
  PipelineResult r = est.finish();
  r.timings.simulate_s = sync_s;
  analyze(r, config, link);
  return r;
}

}  // namespace ppe
