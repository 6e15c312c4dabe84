#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ppe/config.hpp"
#include "ppe/pipeline.hpp"

namespace ppe {

enum class OutputFormat { csv, json };

/// Stamp carried by every artifact.
struct ArtifactStamp {
  std::string scenario;
  std::string scenario_hash;
  std::string tool_version = PPE_VERSION;
};

ArtifactStamp stamp_for(const ScenarioConfig& config);

/// z_km, gamma_prime (1/km), power_dbm, std_dbm, preceded by # metadata lines.
void write_profile_csv(const std::filesystem::path& path, const ProfileEstimate& p, const ArtifactStamp& s);
void write_profile_json(const std::filesystem::path& path, const ProfileEstimate& p, const ArtifactStamp& s);
ProfileEstimate read_profile_json(const std::filesystem::path& path);

void write_theory_csv(const std::filesystem::path& path, const TheoreticalProfile& t, const ArtifactStamp& s);
void write_conditioning_csv(const std::filesystem::path& path, const std::vector<ConditioningReport>& reports,
                            const ArtifactStamp& s);
void write_conditioning_json(const std::filesystem::path& path, const std::vector<ConditioningReport>& reports,
                             const ArtifactStamp& s);
void write_anomaly_csv(const std::filesystem::path& path, const AnomalyReport& r, const ArtifactStamp& s);
void write_anomaly_json(const std::filesystem::path& path, const AnomalyReport& r, const ArtifactStamp& s);

/// Writes every artifact of a pipeline run into `dir`; returns the file names.
std::vector<std::string> write_pipeline_artifacts(const std::filesystem::path& dir, const PipelineResult& r,
                                                  const ScenarioConfig& config, OutputFormat format);

/// manifest.json: scenario, hash, version, seeds, timings, artifact list.
void write_manifest(const std::filesystem::path& dir, const std::string& command, const ScenarioConfig& config,
                    const std::vector<std::uint64_t>& seeds, const std::map<std::string, double>& timings,
                    const std::vector<std::string>& files);

}  // namespace ppe
