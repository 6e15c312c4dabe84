#pragma once

#include <complex>
#include <filesystem>
#include <optional>
#include <vector>

#include "ppe/anomaly.hpp"
#include "ppe/conditioning.hpp"
#include "ppe/config.hpp"
#include "ppe/profile_estimate.hpp"
#include "ppe/theoretical_profile.hpp"

namespace ppe {

/// ||A1||^2 / ||A0||^2 above which rx and tx are deemed not to belong together.
inline constexpr double kGrossResidualRatio = 0.5;

/// One frame at the estimation rate.
struct Frame {
  Field tx;
  Field rx;
  std::uint64_t seed = 0;
};

/// Source seed of frame `index`; the ASE stream uses the next one.
std::uint64_t frame_seed(const ScenarioConfig& config, std::size_t index);

/// Seeded source + propagation + decimation for frame `index`.
Frame simulate_frame(const ScenarioConfig& config, const LinkSpec& link, std::size_t index);

/// Frames laid end to end, as written by `simulate`.
struct Captures {
  Field tx;
  Field rx;
};

struct Timings {
  double simulate_s = 0.0;
  double estimate_s = 0.0;
  double analyze_s = 0.0;
};

struct PipelineResult {
  std::optional<ProfileEstimate> ls;
  std::optional<ProfileEstimate> cm;
  std::optional<ProfileEstimate> ls_augmented;
  std::vector<std::complex<double>> augmented_scales;  // one per frame (or one for joint averaging)
  TheoreticalProfile theory;                            // on the estimation grid
  std::optional<ConditioningReport> conditioning;
  std::optional<AnomalyReport> anomaly;
  std::optional<double> ls_rms_db;
  std::optional<double> cm_rms_db;  // after best single-offset calibration
  std::vector<std::uint64_t> seeds;
  std::size_t guard_samples = 0;
  Timings timings;
};

/// Incremental estimator: feed frames, then finish().
class Estimator {
 public:
  Estimator(const ScenarioConfig& config, const LinkSpec& link, bool dual_pol);

  void add_frame(const Frame& frame);
  PipelineResult finish();

  std::size_t guard_samples(const Field& frame_tx) const;

 private:
  const ScenarioConfig& cfg_;
  LinkSpec link_;
  EstimationGrid grid_;
  bool dual_pol_;
  SolveOptions solve_;
  bool want_ls_, want_cm_, want_aug_;

  std::vector<ProfileEstimate> ls_, cm_, aug_;
  std::optional<PerturbationSystem> joint_;
  std::optional<AugmentedSystem> joint_aug_;
  std::vector<std::complex<double>> scales_;
  std::vector<std::uint64_t> seeds_;
  std::size_t guard_ = 0;
  double seconds_ = 0.0;
};

/// simulate -> estimate -> analyze for every configured frame.
PipelineResult run_pipeline(const ScenarioConfig& config);

/// Adds theory, RMS errors, conditioning and anomaly reports.
void analyze(PipelineResult& result, const ScenarioConfig& config, const LinkSpec& link);


/// Simulates every configured frame and concatenates tx and rx.
Captures simulate_captures(const ScenarioConfig& config, double* seconds = nullptr);

/// Splits concatenated captures into frames of `samples_per_frame`.
std::vector<Frame> split_frames(const Captures& c, std::size_t samples_per_frame);

/// Reads tx/rx captures, checks headers, synchronizes rx against the
/// CD-loaded tx (integer lag), estimates and analyzes.
PipelineResult estimate_from_files(const ScenarioConfig& config, const std::filesystem::path& tx_path,
                                   const std::filesystem::path& rx_path);

}  // namespace ppe
