#include "ppe/artifacts.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ppe/errors.hpp"

namespace ppe {

using nlohmann::json;

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void close_out(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void stamp_lines(std::ostream& os, const ArtifactStamp& s) {
  os << "# scenario=" << s.scenario << "\n# scenario_hash=" << s.scenario_hash << "\n# tool_version=" << s.tool_version
     << '\n';
}

json stamp_json(const ArtifactStamp& s) {
  return {{"scenario", s.scenario}, {"scenario_hash", s.scenario_hash}, {"tool_version", s.tool_version}};
}

// JSON has no infinity; write it as a string
json finite_or_string(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : "-inf";
}

Method method_from_string(const std::string& s) {
  if (s == "LS") return Method::ls;
  if (s == "CM") return Method::cm;
  if (s == "LS-augmented") return Method::ls_augmented;
  throw IoError("unknown method in profile: " + s);
}

void write_json(const std::filesystem::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  close_out(out, path);
}

}  // namespace

ArtifactStamp stamp_for(const ScenarioConfig& config) { return {config.name, config.hash_hex(), PPE_VERSION}; }

void write_profile_csv(const std::filesystem::path& path, const ProfileEstimate& p, const ArtifactStamp& s) {
  auto out = open_out(path);
  stamp_lines(out, s);
  out << "# method=" << to_string(p.method) << " dz_km=" << num(p.dz_m / 1e3) << " frames=" << p.frames
      << " arbitrary_units=" << (p.arbitrary_units ? "true" : "false") << '\n';
  out << "z_km,gamma_prime,power_dbm,std_dbm\n";
  for (std::size_t k = 0; k < p.z_m.size(); ++k)
    out << num(p.z_m[k] / 1e3) << ',' << num(p.gamma_prime[k] * 1e3) << ',' << num(p.power_dbm[k]) << ','
        << num(k < p.std_db.size() ? p.std_db[k] : 0.0) << '\n';
  close_out(out, path);
}

void write_profile_json(const std::filesystem::path& path, const ProfileEstimate& p, const ArtifactStamp& s) {
  json j = stamp_json(s);
  j["method"] = to_string(p.method);
  j["dual_pol"] = p.dual_pol;
  j["arbitrary_units"] = p.arbitrary_units;
  j["dz_km"] = p.dz_m / 1e3;
  j["frames"] = p.frames;
  j["profiles_averaged"] = p.profiles_averaged;
  j["seeds"] = p.seeds;
  j["normal_condition"] = finite_or_string(p.normal_condition);
  j["cond_g"] = finite_or_string(p.cond_g);
  j["stable"] = p.stable;
  json z = json::array(), g = json::array(), gs = json::array(), pw = json::array(), sd = json::array(),
       gm = json::array();
  for (std::size_t k = 0; k < p.z_m.size(); ++k) {
    z.push_back(p.z_m[k] / 1e3);
    g.push_back(p.gamma_prime[k] * 1e3);
    gs.push_back(k < p.gamma_prime_std.size() ? p.gamma_prime_std[k] * 1e3 : 0.0);
    pw.push_back(p.power_dbm[k]);
    sd.push_back(k < p.std_db.size() ? p.std_db[k] : 0.0);
    gm.push_back(p.gamma_per_w_m[k] * 1e3);
  }
  j["z_km"] = z;
  j["gamma_prime_per_km"] = g;
  j["gamma_prime_std_per_km"] = gs;
  j["power_dbm"] = pw;
  j["std_db"] = sd;
  j["gamma_per_w_km"] = gm;
  write_json(path, j);
}

ProfileEstimate read_profile_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  ProfileEstimate p;
  try {
    const json j = json::parse(in);
    p.method = method_from_string(j.at("method").get<std::string>());
    p.dual_pol = j.at("dual_pol").get<bool>();
    p.arbitrary_units = j.at("arbitrary_units").get<bool>();
    p.dz_m = j.at("dz_km").get<double>() * 1e3;
    p.frames = j.at("frames").get<std::size_t>();
    p.profiles_averaged = j.at("profiles_averaged").get<std::size_t>();
    p.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    for (double v : j.at("z_km").get<std::vector<double>>()) p.z_m.push_back(v * 1e3);
    for (double v : j.at("gamma_prime_per_km").get<std::vector<double>>()) p.gamma_prime.push_back(v / 1e3);
    for (double v : j.at("gamma_prime_std_per_km").get<std::vector<double>>()) p.gamma_prime_std.push_back(v / 1e3);
    for (double v : j.at("gamma_per_w_km").get<std::vector<double>>()) p.gamma_per_w_m.push_back(v / 1e3);
    p.power_dbm = j.at("power_dbm").get<std::vector<double>>();
    p.std_db = j.at("std_db").get<std::vector<double>>();
    const auto& c = j.at("cond_g");
    p.cond_g = c.is_number() ? c.get<double>() : INFINITY;
    p.stable = j.at("stable").get<bool>();
  } catch (const json::exception& e) {
    throw IoError("malformed profile " + path.string() + ": " + e.what());
  }
  const std::size_t k = p.z_m.size();
  if (p.gamma_prime.size() != k || p.power_dbm.size() != k || p.gamma_per_w_m.size() != k)
    throw IoError("profile arrays differ in length: " + path.string());
  return p;
}

void write_theory_csv(const std::filesystem::path& path, const TheoreticalProfile& t, const ArtifactStamp& s) {
  auto out = open_out(path);
  stamp_lines(out, s);
  out << "z_km,power_dbm,gamma_prime\n";
  for (std::size_t k = 0; k < t.z_m.size(); ++k)
    out << num(t.z_m[k] / 1e3) << ',' << num(t.power_dbm[k]) << ',' << num(t.gamma_prime[k] * 1e3) << '\n';
  close_out(out, path);
}

void write_conditioning_csv(const std::filesystem::path& path, const std::vector<ConditioningReport>& reports,
                            const ArtifactStamp& s) {
  auto out = open_out(path);
  stamp_lines(out, s);
  out << "format,beta2_ps2_per_km,bandwidth_ghz,dz_km,k,metric,cond_g,cond_g_complex,stable_predicted,stable_observed\n";
  for (const auto& r : reports)
    out << to_string(r.format) << ',' << num(r.beta2_s2_per_m * 1e27) << ',' << num(r.bandwidth_hz / 1e9) << ','
        << num(r.dz_m / 1e3) << ',' << r.k << ',' << num(r.metric) << ',' << num(r.cond_g) << ','
        << num(r.cond_g_complex) << ',' << (r.stable_predicted ? 1 : 0) << ',' << (r.stable_observed ? 1 : 0) << '\n';
  close_out(out, path);
}

void write_conditioning_json(const std::filesystem::path& path, const std::vector<ConditioningReport>& reports,
                             const ArtifactStamp& s) {
  json j = stamp_json(s);
  json arr = json::array();
  for (const auto& r : reports)
    arr.push_back({{"format", to_string(r.format)},
                   {"beta2_ps2_per_km", r.beta2_s2_per_m * 1e27},
                   {"bandwidth_ghz", r.bandwidth_hz / 1e9},
                   {"dz_km", r.dz_m / 1e3},
                   {"k", r.k},
                   {"metric", finite_or_string(r.metric)},
                   {"cond_g", finite_or_string(r.cond_g)},
                   {"cond_g_complex", finite_or_string(r.cond_g_complex)},
                   {"stable_predicted", r.stable_predicted},
                   {"stable_observed", r.stable_observed}});
  j["reports"] = arr;
  write_json(path, j);
}

void write_anomaly_csv(const std::filesystem::path& path, const AnomalyReport& r, const ArtifactStamp& s) {
  auto out = open_out(path);
  stamp_lines(out, s);
  out << "# sigma_db=" << num(r.sigma_db) << " threshold_db=" << num(r.threshold_db) << '\n';
  for (const auto& e : r.events)
    out << "# event z_km=" << num(e.z_m / 1e3) << " estimated_loss_db=" << num(e.estimated_loss_db) << '\n';
  out << "z_km,residual_db,step_db,excluded\n";
  for (std::size_t k = 0; k < r.z_m.size(); ++k)
    out << num(r.z_m[k] / 1e3) << ',' << num(r.residual_db[k]) << ',' << num(r.step_db[k]) << ','
        << (r.excluded[k] ? 1 : 0) << '\n';
  close_out(out, path);
}

void write_anomaly_json(const std::filesystem::path& path, const AnomalyReport& r, const ArtifactStamp& s) {
  json j = stamp_json(s);
  j["sigma_db"] = r.sigma_db;
  j["threshold_db"] = r.threshold_db;
  json ev = json::array();
  for (const auto& e : r.events)
    ev.push_back({{"z_km", e.z_m / 1e3}, {"estimated_loss_db", e.estimated_loss_db}, {"step_db", e.step_db}});
  j["detected_events"] = ev;
  json z = json::array(), res = json::array();
  for (std::size_t k = 0; k < r.z_m.size(); ++k) {
    z.push_back(r.z_m[k] / 1e3);
    res.push_back(r.residual_db[k]);
  }
  j["z_km"] = z;
  j["residual_db"] = res;
  write_json(path, j);
}

std::vector<std::string> write_pipeline_artifacts(const std::filesystem::path& dir, const PipelineResult& r,
                                                  const ScenarioConfig& config, OutputFormat format) {
  const ArtifactStamp s = stamp_for(config);
  std::vector<std::string> files;
  const bool csv = format == OutputFormat::csv;
  auto profile = [&](const std::optional<ProfileEstimate>& p, const std::string& stem) {
    if (!p) return;
    const std::string name = stem + (csv ? ".csv" : ".json");
    if (csv) write_profile_csv(dir / name, *p, s);
    else write_profile_json(dir / name, *p, s);
    files.push_back(name);
  };
  profile(r.ls, "profile_ls");
  profile(r.cm, "profile_cm");
  profile(r.ls_augmented, "profile_ls_augmented");
  if (!r.theory.z_m.empty()) {
    write_theory_csv(dir / "theory.csv", r.theory, s);
    files.push_back("theory.csv");
  }
  if (r.conditioning) {
    const std::string name = csv ? "conditioning.csv" : "conditioning.json";
    if (csv) write_conditioning_csv(dir / name, {*r.conditioning}, s);
    else write_conditioning_json(dir / name, {*r.conditioning}, s);
    files.push_back(name);
  }
  if (r.anomaly) {
    const std::string name = csv ? "anomaly.csv" : "anomaly.json";
    if (csv) write_anomaly_csv(dir / name, *r.anomaly, s);
    else write_anomaly_json(dir / name, *r.anomaly, s);
    files.push_back(name);
  }
  // summary numbers, always JSON
  json sum = stamp_json(s);
  if (r.ls_rms_db) sum["ls_rms_error_db"] = *r.ls_rms_db;
  if (r.cm_rms_db) sum["cm_calibrated_rms_error_db"] = *r.cm_rms_db;
  if (r.conditioning) {
    sum["stability_metric"] = finite_or_string(r.conditioning->metric);
    sum["cond_g"] = finite_or_string(r.conditioning->cond_g);
    sum["stable_predicted"] = r.conditioning->stable_predicted;
    sum["stable_observed"] = r.conditioning->stable_observed;
  }
  if (r.anomaly) {
    json ev = json::array();
    for (const auto& e : r.anomaly->events) ev.push_back({{"z_km", e.z_m / 1e3}, {"estimated_loss_db", e.estimated_loss_db}});
    sum["detected_events"] = ev;
  }
  json scales = json::array();
  for (const auto& c : r.augmented_scales) scales.push_back({{"re", c.real()}, {"im", c.imag()}});
  if (!r.augmented_scales.empty()) sum["augmented_scales"] = scales;
  sum["guard_samples"] = r.guard_samples;
  write_json(dir / "summary.json", sum);
  files.push_back("summary.json");
  return files;
}

void write_manifest(const std::filesystem::path& dir, const std::string& command, const ScenarioConfig& config,
                    const std::vector<std::uint64_t>& seeds, const std::map<std::string, double>& timings,
                    const std::vector<std::string>& files) {
  json j = stamp_json(stamp_for(config));
  j["command"] = command;
  j["seed"] = config.seed;
  j["frame_seeds"] = seeds;
  j["timings_s"] = timings;
  j["artifacts"] = files;
  j["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                       std::to_string(EIGEN_MINOR_VERSION);
  write_json(dir / "manifest.json", j);
}

}  // namespace ppe
