#pragma once

#include <cstddef>
#include <vector>

namespace ppe {

enum class GainMode { restore_to_launch, fixed };

/// Lumped amplifier sitting at the start of a span.
struct AmplifierSpec {
  GainMode mode = GainMode::restore_to_launch;
  double fixed_gain_db = 0.0;
  double noise_figure_db = 5.0;
};

/// One fiber span, SI units throughout. Use from_conventional() when the
/// parameters come in the usual km / dB / ps^2 units.
struct SpanSpec {
  double length_m = 0.0;
  double alpha_per_m = 0.0;        // power attenuation, natural log
  double beta2_s2_per_m = 0.0;
  double beta3_s3_per_m = 0.0;
  double gamma_per_w_m = 0.0;
  double launch_power_w = 1e-3;
  AmplifierSpec amplifier{};

  static SpanSpec from_conventional(double length_km, double alpha_db_per_km, double beta2_ps2_per_km,
                                    double beta3_ps3_per_km, double gamma_per_w_km, double launch_power_dbm);
  void validate() const;
};

struct PointLoss {
  double position_m = 0.0;
  double attenuation_db = 0.0;
};

class LinkSpec {
 public:
  LinkSpec(std::vector<SpanSpec> spans, std::vector<PointLoss> point_losses = {}, double tx_power_w = 1e-3);

  const std::vector<SpanSpec>& spans() const { return spans_; }
  const std::vector<PointLoss>& point_losses() const { return point_losses_; }
  double tx_power_w() const { return tx_power_w_; }
  double total_length_m() const { return total_length_m_; }

  double span_start_m(std::size_t i) const { return starts_[i]; }
  double span_end_m(std::size_t i) const { return starts_[i] + spans_[i].length_m; }
  std::size_t span_index_at(double z_m) const;

  // Power entering the amplifier of span i, amplifier gain and resulting launch power.
  double amplifier_input_w(std::size_t i) const { return amp_input_w_[i]; }
  double amplifier_gain(std::size_t i) const { return launch_w_[i] / amp_input_w_[i]; }
  double launch_power_w(std::size_t i) const { return launch_w_[i]; }

  /// Signal power at z, right-continuous at amplifiers and point losses.
  double power_w_at(double z_m) const;
  double gamma_at(double z_m) const;

  /// Integral of beta2 (beta3) over [z1, z2]; negative when z2 < z1.
  double accumulated_beta2(double z1_m, double z2_m) const;
  double accumulated_beta3(double z1_m, double z2_m) const;
  /// Upper bound on |accumulated beta2| along the link.
  double max_abs_accumulated_beta2() const;

  LinkSpec with_point_losses(std::vector<PointLoss> losses) const;

 private:
  double integrate(double z1, double z2, double SpanSpec::*member) const;
  double point_loss_db_between(double z1_exclusive, double z2_inclusive) const;

  std::vector<SpanSpec> spans_;
  std::vector<PointLoss> point_losses_;
  double tx_power_w_;
  double total_length_m_ = 0.0;
  std::vector<double> starts_;
  std::vector<double> amp_input_w_;
  std::vector<double> launch_w_;
};

}  // namespace ppe
