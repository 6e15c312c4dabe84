#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ppe/anomaly.hpp"
#include "ppe/conditioning.hpp"
#include "ppe/link.hpp"
#include "ppe/perturbation.hpp"
#include "ppe/simulator.hpp"
#include "ppe/solver.hpp"
#include "ppe/source.hpp"

namespace ppe {

// --- minimal TOML subset: [table], [[array.of.tables]], key = value with
// strings, numbers, booleans and (possibly multi-line) arrays, # comments.

struct TomlValue {
  enum class Kind { number, boolean, string, array } kind = Kind::number;
  double number = 0.0;
  bool boolean = false;
  std::string string;
  std::vector<TomlValue> array;
  int line = 0;
};

struct TomlTable {
  std::map<std::string, TomlValue> values;
  std::map<std::string, TomlTable> tables;
  std::map<std::string, std::vector<TomlTable>> arrays;
  int line = 0;
};

/// Throws ConfigError with a line number on malformed input.
TomlTable parse_toml(const std::string& text);

// --- scenario configuration

enum class MethodChoice { ls, cm, ls_augmented, both };
enum class Averaging { profiles, normal_equations };

struct EstimationConfig {
  double dz_m = 500.0;
  std::size_t frames = 1;
  std::size_t samples_per_symbol = 2;     // estimation rate
  std::size_t samples_per_frame = 32768;  // at the estimation rate
  MethodChoice method = MethodChoice::both;
  Averaging averaging = Averaging::profiles;
  bool dual_pol = false;
  std::size_t nl_oversampling = 2;
  std::optional<std::size_t> guard_samples;  // automatic from the CD memory when unset
  Alignment alignment = Alignment::common_phase;
  double ridge = 0.0;
};

struct AnalysisConfig {
  bool detect = false;
  AnomalyOptions anomaly;
  double stability_metric_threshold = kStabilityMetricThreshold;
  double condition_threshold = kStableConditionThreshold;
  bool complex_condition = false;
};

struct ScenarioConfig {
  std::string name = "scenario";
  std::uint64_t seed = 1;
  std::string output_dir;

  std::vector<SpanSpec> spans;
  std::vector<PointLoss> losses;
  double tx_power_w = 1e-3;
  SourceSpec source;
  SimConfig sim;
  EstimationConfig estimation;
  AnalysisConfig analysis;
  std::optional<SweepSpec> sweep;

  std::string source_text;  // raw configuration text

  LinkSpec link() const { return LinkSpec(spans, losses, tx_power_w); }
  /// Replaces the master seed everywhere it is used.
  void set_seed(std::uint64_t s);
  /// FNV-1a over the configuration text and the effective seed.
  std::uint64_t hash() const;
  std::string hash_hex() const;
  void validate() const;
};

/// Strict parse: unknown sections or keys and wrongly typed values raise
/// ConfigError. Units are converted to SI here and nowhere else.
ScenarioConfig parse_scenario(const std::string& text);
ScenarioConfig load_scenario(const std::filesystem::path& path);

std::uint64_t fnv1a(const std::string& data, std::uint64_t h = 0xcbf29ce484222325ull);

std::string to_string(MethodChoice m);
std::string to_string(Averaging a);

}  // namespace ppe
