#include "ppe/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "ppe/errors.hpp"
#include "ppe/units.hpp"

namespace ppe {

std::uint64_t fnv1a(const std::string& data, std::uint64_t h) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string to_string(MethodChoice m) {
  switch (m) {
    case MethodChoice::ls: return "LS";
    case MethodChoice::cm: return "CM";
    case MethodChoice::ls_augmented: return "LS-augmented";
    case MethodChoice::both: return "both";
  }
  return "?";
}

std::string to_string(Averaging a) { return a == Averaging::profiles ? "profiles" : "normal-equations"; }

// ---------------------------------------------------------------- TOML subset

namespace {

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ConfigError("line " + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string strip_comment(const std::string& s) {
  bool in_str = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_str = !in_str;
    if (s[i] == '#' && !in_str) return s.substr(0, i);
  }
  return s;
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  return true;
}

std::vector<std::string> split_path(const std::string& p, int line) {
  std::vector<std::string> parts;
  std::stringstream ss(p);
  std::string part;
  while (std::getline(ss, part, '.')) {
    part = trim(part);
    if (!valid_key(part)) fail(line, "invalid table name '" + p + "'");
    parts.push_back(part);
  }
  if (parts.empty()) fail(line, "empty table name");
  return parts;
}

class ValueParser {
 public:
  ValueParser(const std::string& s, int line) : s_(s), line_(line) {}

  TomlValue parse() {
    TomlValue v = value();
    skip_ws();
    if (pos_ != s_.size()) fail(line_, "unexpected trailing characters in value");
    return v;
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  TomlValue value() {
    skip_ws();
    if (pos_ >= s_.size()) fail(line_, "missing value");
    TomlValue v;
    v.line = line_;
    const char c = s_[pos_];
    if (c == '"') {
      v.kind = TomlValue::Kind::string;
      ++pos_;
      while (true) {
        if (pos_ >= s_.size()) fail(line_, "unterminated string");
        char ch = s_[pos_++];
        if (ch == '"') break;
        if (ch == '\\') {
          if (pos_ >= s_.size()) fail(line_, "bad escape");
          const char e = s_[pos_++];
          ch = e == 'n' ? '\n' : e == 't' ? '\t' : e;
          if (e != 'n' && e != 't' && e != '"' && e != '\\') fail(line_, "unsupported escape");
        }
        v.string.push_back(ch);
      }
    } else if (c == '[') {
      v.kind = TomlValue::Kind::array;
      ++pos_;
      skip_ws();
      if (pos_ < s_.size() && s_[pos_] == ']') {
        ++pos_;
        return v;
      }
      while (true) {
        v.array.push_back(value());
        skip_ws();
        if (pos_ >= s_.size()) fail(line_, "unterminated array");
        if (s_[pos_] == ',') {
          ++pos_;
          skip_ws();
          if (pos_ < s_.size() && s_[pos_] == ']') {
            ++pos_;
            break;
          }
          continue;
        }
        if (s_[pos_] == ']') {
          ++pos_;
          break;
        }
        fail(line_, "expected ',' or ']' in array");
      }
    } else if (s_.compare(pos_, 4, "true") == 0) {
      v.kind = TomlValue::Kind::boolean;
      v.boolean = true;
      pos_ += 4;
    } else if (s_.compare(pos_, 5, "false") == 0) {
      v.kind = TomlValue::Kind::boolean;
      pos_ += 5;
    } else {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
                                  s_[pos_] == '+' || s_[pos_] == '-' || s_[pos_] == '_'))
        ++pos_;
      std::string tok = s_.substr(start, pos_ - start);
      std::erase(tok, '_');
      if (tok.empty()) fail(line_, "unrecognized value");
      std::size_t used = 0;
      try {
        v.number = std::stod(tok, &used);
      } catch (const std::exception&) {
        fail(line_, "unrecognized value '" + tok + "'");
      }
      if (used != tok.size() || !std::isfinite(v.number)) fail(line_, "unrecognized value '" + tok + "'");
    }
    return v;
  }

  const std::string& s_;
  std::size_t pos_ = 0;
  int line_;
};

int bracket_balance(const std::string& s) {
  int depth = 0;
  bool in_str = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_str = !in_str;
    if (in_str) continue;
    if (s[i] == '[') ++depth;
    if (s[i] == ']') --depth;
  }
  return depth;
}

}  // namespace

TomlTable parse_toml(const std::string& text) {
  TomlTable root;
  TomlTable* current = &root;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;
    if (s.front() == '[') {
      const bool array = s.rfind("[[", 0) == 0;
      if (array ? (s.size() < 4 || s.substr(s.size() - 2) != "]]") : s.back() != ']') fail(line, "malformed table header");
      const auto parts = split_path(array ? s.substr(2, s.size() - 4) : s.substr(1, s.size() - 2), line);
      TomlTable* t = &root;
      for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        if (t->values.count(parts[i])) fail(line, "'" + parts[i] + "' is a value, not a table");
        auto arr = t->arrays.find(parts[i]);
        if (arr != t->arrays.end()) t = &arr->second.back();
        else t = &t->tables[parts[i]];
      }
      const std::string& last = parts.back();
      if (t->values.count(last)) fail(line, "'" + last + "' is a value, not a table");
      if (array) {
        if (t->tables.count(last)) fail(line, "'" + last + "' already defined as a table");
        auto& vec = t->arrays[last];
        vec.emplace_back();
        current = &vec.back();
      } else {
        if (t->arrays.count(last)) fail(line, "'" + last + "' already defined as an array of tables");
        if (t->tables.count(last) && t->tables[last].line != 0) fail(line, "table '" + last + "' defined twice");
        current = &t->tables[last];
      }
      current->line = line;
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected key = value");
    const std::string key = trim(s.substr(0, eq));
    if (!valid_key(key)) fail(line, "invalid key '" + key + "'");
    std::string value = trim(s.substr(eq + 1));
    const int start_line = line;
    while (bracket_balance(value) > 0) {
      if (!std::getline(in, raw)) fail(start_line, "unterminated array");
      ++line;
      value += " " + trim(strip_comment(raw));
    }
    if (current->values.count(key) || current->tables.count(key) || current->arrays.count(key))
      fail(start_line, "duplicate key '" + key + "'");
    current->values[key] = ValueParser(value, start_line).parse();
  }
  return root;
}

// ---------------------------------------------------------------- scenario

namespace {

const char* kind_name(TomlValue::Kind k) {
  switch (k) {
    case TomlValue::Kind::number: return "a number";
    case TomlValue::Kind::boolean: return "a boolean";
    case TomlValue::Kind::string: return "a string";
    case TomlValue::Kind::array: return "an array";
  }
  return "?";
}

// Strict accessor: every key must be consumed, types are checked.
class Section {
 public:
  Section(const TomlTable* t, std::string path) : t_(t), path_(std::move(path)) {}

  bool present() const { return t_ != nullptr; }
  bool has(const std::string& key) const { return t_ && t_->values.count(key); }

  double number(const std::string& key, double def) { return opt_number(key).value_or(def); }
  double number(const std::string& key) {
    auto v = opt_number(key);
    if (!v) throw ConfigError("missing required key '" + name(key) + "'");
    return *v;
  }
  std::optional<double> opt_number(const std::string& key) {
    const TomlValue* v = get(key, TomlValue::Kind::number);
    return v ? std::optional<double>(v->number) : std::nullopt;
  }
  std::size_t count(const std::string& key, std::size_t def) {
    auto v = opt_number(key);
    if (!v) return def;
    return to_count(*v, key);
  }
  bool boolean(const std::string& key, bool def) {
    const TomlValue* v = get(key, TomlValue::Kind::boolean);
    return v ? v->boolean : def;
  }
  std::string string(const std::string& key, const std::string& def) {
    const TomlValue* v = get(key, TomlValue::Kind::string);
    return v ? v->string : def;
  }
  std::vector<double> numbers(const std::string& key, std::vector<double> def) {
    const TomlValue* v = get(key, TomlValue::Kind::array);
    if (!v) return def;
    std::vector<double> out;
    for (const auto& e : v->array) {
      if (e.kind != TomlValue::Kind::number) throw ConfigError("'" + name(key) + "' must hold numbers");
      out.push_back(e.number);
    }
    return out;
  }
  std::vector<std::string> strings(const std::string& key, std::vector<std::string> def) {
    const TomlValue* v = get(key, TomlValue::Kind::array);
    if (!v) return def;
    std::vector<std::string> out;
    for (const auto& e : v->array) {
      if (e.kind != TomlValue::Kind::string) throw ConfigError("'" + name(key) + "' must hold strings");
      out.push_back(e.string);
    }
    return out;
  }
  Section table(const std::string& key) {
    used_.insert(key);
    if (!t_) return {nullptr, name(key)};
    auto it = t_->tables.find(key);
    if (it == t_->tables.end()) {
      if (t_->values.count(key) || t_->arrays.count(key)) throw ConfigError("'" + name(key) + "' must be a table");
      return {nullptr, name(key)};
    }
    return {&it->second, name(key)};
  }
  std::vector<Section> array(const std::string& key) {
    used_.insert(key);
    std::vector<Section> out;
    if (!t_) return out;
    auto it = t_->arrays.find(key);
    if (it == t_->arrays.end()) {
      if (t_->values.count(key) || t_->tables.count(key))
        throw ConfigError("'" + name(key) + "' must be an array of tables ([[" + name(key) + "]])");
      return out;
    }
    for (std::size_t i = 0; i < it->second.size(); ++i)
      out.emplace_back(&it->second[i], name(key) + "[" + std::to_string(i) + "]");
    return out;
  }

  /// Rejects anything that was not read.
  void finish() const {
    if (!t_) return;
    auto check = [&](const std::string& k) {
      if (!used_.count(k)) throw ConfigError("unknown key '" + name(k) + "'");
    };
    for (const auto& [k, v] : t_->values) check(k);
    for (const auto& [k, v] : t_->tables) check(k);
    for (const auto& [k, v] : t_->arrays) check(k);
  }

  std::size_t to_count(double v, const std::string& key) const {
    if (v < 0 || v != std::floor(v) || v > 9.0e15) throw ConfigError("'" + name(key) + "' must be a non-negative integer");
    return static_cast<std::size_t>(v);
  }

 private:
  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const TomlValue* get(const std::string& key, TomlValue::Kind kind) {
    used_.insert(key);
    if (!t_) return nullptr;
    if (t_->tables.count(key) || t_->arrays.count(key)) throw ConfigError("'" + name(key) + "' must be a value");
    auto it = t_->values.find(key);
    if (it == t_->values.end()) return nullptr;
    if (it->second.kind != kind)
      throw ConfigError("line " + std::to_string(it->second.line) + ": '" + name(key) + "' must be " + kind_name(kind) +
                        ", got " + kind_name(it->second.kind));
    return &it->second;
  }

  const TomlTable* t_;
  std::string path_;
  std::set<std::string> used_;
};

MethodChoice parse_method(const std::string& s) {
  if (s == "LS" || s == "ls") return MethodChoice::ls;
  if (s == "CM" || s == "cm") return MethodChoice::cm;
  if (s == "LS-augmented" || s == "ls-augmented") return MethodChoice::ls_augmented;
  if (s == "both") return MethodChoice::both;
  throw ConfigError("unknown estimation method '" + s + "' (LS, CM, LS-augmented, both)");
}

Averaging parse_averaging(const std::string& s) {
  if (s == "profiles") return Averaging::profiles;
  if (s == "normal-equations") return Averaging::normal_equations;
  throw ConfigError("unknown averaging '" + s + "' (profiles, normal-equations)");
}

SigmaMode parse_sigma_mode(const std::string& s) {
  if (s == "fixed") return SigmaMode::fixed;
  if (s == "global") return SigmaMode::global_rms;
  if (s == "prior-window") return SigmaMode::prior_window;
  throw ConfigError("unknown sigma_mode '" + s + "' (fixed, global, prior-window)");
}

TiltMode parse_tilt(const std::string& s) {
  if (s == "nominal") return TiltMode::nominal;
  if (s == "fitted") return TiltMode::fitted;
  throw ConfigError("unknown tilt '" + s + "' (nominal, fitted)");
}

Alignment parse_alignment(const std::string& s) {
  if (s == "common-phase") return Alignment::common_phase;
  if (s == "none") return Alignment::none;
  throw ConfigError("unknown alignment '" + s + "' (common-phase, none)");
}

Modulation modulation_or_config_error(const std::string& s) {
  try {
    return parse_modulation(s);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

std::uint64_t ScenarioConfig::hash() const { return fnv1a("seed=" + std::to_string(seed) + "\n", fnv1a(source_text)); }

void ScenarioConfig::set_seed(std::uint64_t s) {
  seed = s;
  sim.seed = s;
  source.seed = s;
  if (sweep) sweep->seed = s;
}

std::string ScenarioConfig::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

void ScenarioConfig::validate() const {
  try {
    source.validate();
    sim.validate();
    if (!sweep) {
      if (spans.empty()) throw ConfigError("at least one [[link.span]] is required");
      (void)link();
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (!(estimation.dz_m > 0.0)) throw ConfigError("estimation.dz_km must be positive");
  if (estimation.frames == 0) throw ConfigError("estimation.frames must be >= 1");
  if (estimation.samples_per_symbol < 2 || estimation.samples_per_symbol > sim.sps)
    throw ConfigError("estimation.samples_per_symbol must lie in [2, sim.samples_per_symbol]");
  if (estimation.samples_per_frame < 64 || estimation.samples_per_frame % estimation.samples_per_symbol)
    throw ConfigError("estimation.samples_per_frame must be a multiple of samples_per_symbol and >= 64");
  if (estimation.nl_oversampling == 0) throw ConfigError("estimation.nl_oversampling must be >= 1");
  if (estimation.ridge < 0.0) throw ConfigError("estimation.ridge must be >= 0");
  if (analysis.anomaly.sigma_mode == SigmaMode::fixed && !(analysis.anomaly.sigma_db > 0.0))
    throw ConfigError("analysis.sigma_db must be positive");
  if (sweep) {
    if (sweep->beta2_ps2_per_km.empty() || sweep->bandwidth_ghz.empty() || sweep->dz_km.empty() ||
        sweep->formats.empty())
      throw ConfigError("sweep axes must not be empty");
    for (double b : sweep->bandwidth_ghz)
      if (!(b > 0.0)) throw ConfigError("sweep.bandwidth_ghz must be positive");
    for (double d : sweep->dz_km)
      if (!(d > 0.0)) throw ConfigError("sweep.dz_km must be positive");
    if (sweep->k < 2) throw ConfigError("sweep.k must be >= 2");
    if (sweep->samples_per_symbol < 2 || sweep->nl_oversampling < 1)
      throw ConfigError("sweep.samples_per_symbol must be >= 2 and sweep.nl_oversampling >= 1");
  }
}

ScenarioConfig parse_scenario(const std::string& text) {
  const TomlTable root_table = parse_toml(text);
  Section root(&root_table, "");
  ScenarioConfig c;
  c.source_text = text;

  Section sc = root.table("scenario");
  c.name = sc.string("name", c.name);
  c.seed = sc.count("seed", c.seed);
  c.output_dir = sc.string("output_dir", "");
  sc.finish();

  Section src = root.table("source");
  c.source.format = modulation_or_config_error(src.string("format", to_string(c.source.format)));
  c.source.symbol_rate_hz = gbd_to_hz(src.number("symbol_rate_gbd", c.source.symbol_rate_hz / 1e9));
  c.source.rolloff = src.number("rolloff", c.source.rolloff);
  c.source.pcs_entropy_bits = src.number("pcs_entropy_bits", c.source.pcs_entropy_bits);
  src.finish();

  Section link = root.table("link");
  c.tx_power_w = dbm_to_watts(link.number("tx_power_dbm", watts_to_dbm(c.tx_power_w)));
  for (Section s : link.array("span")) {
    SpanSpec span = SpanSpec::from_conventional(s.number("length_km"), s.number("alpha_db_per_km", 0.2),
                                                s.number("beta2_ps2_per_km", -21.6), s.number("beta3_ps3_per_km", 0.0),
                                                s.number("gamma_per_w_km", 1.3), s.number("launch_power_dbm", 0.0));
    span.amplifier.noise_figure_db = s.number("noise_figure_db", 5.0);
    const std::string mode = s.string("gain_mode", "restore");
    if (mode == "restore") span.amplifier.mode = GainMode::restore_to_launch;
    else if (mode == "fixed") span.amplifier.mode = GainMode::fixed;
    else throw ConfigError("unknown gain_mode '" + mode + "' (restore, fixed)");
    span.amplifier.fixed_gain_db = s.number("fixed_gain_db", 0.0);
    if (span.amplifier.mode == GainMode::fixed && !s.has("fixed_gain_db"))
      throw ConfigError("gain_mode = \"fixed\" requires fixed_gain_db");
    s.finish();
    c.spans.push_back(span);
  }
  for (Section s : link.array("loss")) {
    c.losses.push_back({km_to_m(s.number("position_km")), s.number("attenuation_db")});
    s.finish();
  }
  link.finish();

  Section sim = root.table("sim");
  c.sim.step_m = sim.number("step_m", c.sim.step_m);
  c.sim.sps = sim.count("samples_per_symbol", c.sim.sps);
  c.sim.ase_enabled = sim.boolean("ase", c.sim.ase_enabled);
  sim.finish();

  Section est = root.table("estimation");
  c.estimation.dz_m = km_to_m(est.number("dz_km", c.estimation.dz_m / 1e3));
  c.estimation.frames = est.count("frames", c.estimation.frames);
  c.estimation.samples_per_symbol = est.count("samples_per_symbol", c.estimation.samples_per_symbol);
  c.estimation.samples_per_frame = est.count("samples_per_frame", c.estimation.samples_per_frame);
  c.estimation.method = parse_method(est.string("method", to_string(c.estimation.method)));
  c.estimation.averaging = parse_averaging(est.string("averaging", to_string(c.estimation.averaging)));
  c.estimation.dual_pol = est.boolean("dual_pol", c.estimation.dual_pol);
  c.estimation.nl_oversampling = est.count("nl_oversampling", c.estimation.nl_oversampling);
  if (auto g = est.opt_number("guard_samples")) c.estimation.guard_samples = est.to_count(*g, "guard_samples");
  c.estimation.alignment = parse_alignment(est.string("alignment", "common-phase"));
  c.estimation.ridge = est.number("ridge", c.estimation.ridge);
  est.finish();

  Section an = root.table("analysis");
  c.analysis.detect = an.boolean("detect", c.analysis.detect);
  auto& ao = c.analysis.anomaly;
  ao.sigma_mode = parse_sigma_mode(an.string("sigma_mode", "fixed"));
  ao.sigma_db = an.number("sigma_db", ao.sigma_db);
  ao.threshold_factor = an.number("threshold_factor", ao.threshold_factor);
  ao.dead_zone_m = km_to_m(an.number("dead_zone_km", ao.dead_zone_m / 1e3));
  ao.step_window_m = km_to_m(an.number("step_window_km", ao.step_window_m / 1e3));
  ao.step_gap_m = km_to_m(an.number("step_gap_km", ao.step_gap_m / 1e3));
  ao.prior_window_m = km_to_m(an.number("prior_window_km", ao.prior_window_m / 1e3));
  ao.tilt = parse_tilt(an.string("tilt", "nominal"));
  ao.use_profile_spread = an.boolean("use_profile_spread", ao.use_profile_spread);
  c.analysis.stability_metric_threshold = an.number("stability_metric_threshold", c.analysis.stability_metric_threshold);
  c.analysis.condition_threshold = an.number("condition_threshold", c.analysis.condition_threshold);
  c.analysis.complex_condition = an.boolean("complex_condition", c.analysis.complex_condition);
  an.finish();

  Section sw = root.table("sweep");
  if (sw.present()) {
    SweepSpec s;
    s.beta2_ps2_per_km = sw.numbers("beta2_ps2_per_km", {});
    s.bandwidth_ghz = sw.numbers("bandwidth_ghz", {});
    s.dz_km = sw.numbers("dz_km", {});
    s.formats.clear();
    for (const auto& f : sw.strings("formats", {"Gaussian"})) s.formats.push_back(modulation_or_config_error(f));
    s.k = sw.count("k", s.k);
    s.n_symbols = sw.count("n_symbols", s.n_symbols);
    s.samples_per_symbol = sw.count("samples_per_symbol", s.samples_per_symbol);
    s.nl_oversampling = sw.count("nl_oversampling", s.nl_oversampling);
    s.rolloff = sw.number("rolloff", s.rolloff);
    s.with_complex = c.analysis.complex_condition;
    sw.finish();
    c.sweep = s;
  }
  root.finish();

  c.set_seed(c.seed);
  c.validate();
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

}  // namespace ppe
