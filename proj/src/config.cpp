#include "fpcg/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "fpcg/error.hpp"
#include "fpcg/log.hpp"

namespace fpcg {

// Generated from presets/*.ini at configure time.
struct EmbeddedPreset {
  const char* name;
  const char* text;
};
extern const EmbeddedPreset kEmbeddedPresets[];
extern const std::size_t kEmbeddedPresetCount;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& expected) {
  throw Error(ErrorKind::config, key + ": cannot parse '" + value + "' as " + expected);
}

double parse_double(const std::string& key, const std::string& text) {
  std::string s = trim(text);
  if (!s.empty() && s.front() == '+') s.erase(0, 1);
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || p != end || std::isnan(v)) bad_value(key, text, "a number");
  return v;
}

long long parse_int(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  long long v = 0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || p != end) bad_value(key, text, "an integer");
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  std::string s = trim(text);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  bad_value(key, text, "a boolean");
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::string s = text;
  for (char& c : s) {
    if (c == '(' || c == ')' || c == '[' || c == ']' || c == ',') c = ' ';
  }
  std::istringstream is(s);
  std::vector<double> out;
  std::string tok;
  while (is >> tok) out.push_back(parse_double(key, tok));
  return out;
}

Interval parse_pair(const std::string& key, const std::string& text) {
  const auto v = parse_list(key, text);
  if (v.size() != 2) bad_value(key, text, "a pair (lo, hi)");
  return {v[0], v[1]};
}

ThetaVector parse_theta(const std::string& key, const std::string& text) {
  const auto v = parse_list(key, text);
  if (v.size() != kThetaDim) bad_value(key, text, "5 values (A_S1, A_S2, tau_S1, tau_S2, deltaT)");
  ThetaVector t;
  std::copy(v.begin(), v.end(), t.begin());
  return t;
}

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string fmt_list(std::span<const double> v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += fmt(v[i]);
  }
  return s;
}

std::string fmt_pair(const Interval& p) { return "(" + fmt(p.first) + ", " + fmt(p.second) + ")"; }

// Schema builders.
using Getter = std::function<double&(SimConfig&)>;

ParamSpec real(std::string key, std::string section, std::string desc, std::optional<Interval> range,
               std::function<double&(SimConfig&)> ref) {
  ParamSpec p;
  p.key = key;
  p.section = std::move(section);
  p.type = "float";
  p.description = std::move(desc);
  p.range = range;
  p.set = [ref, key](SimConfig& c, const std::string& v) { ref(c) = parse_double(key, v); };
  p.get = [ref](const SimConfig& c) { return fmt(ref(const_cast<SimConfig&>(c))); };
  p.values = [ref](const SimConfig& c) { return std::vector<double>{ref(const_cast<SimConfig&>(c))}; };
  return p;
}

template <typename Int>
ParamSpec integer(std::string key, std::string section, std::string desc, std::optional<Interval> range,
                  std::function<Int&(SimConfig&)> ref, long long min_value) {
  ParamSpec p;
  p.key = key;
  p.section = std::move(section);
  p.type = "int";
  p.description = std::move(desc);
  p.range = range;
  p.set = [ref, key, min_value](SimConfig& c, const std::string& v) {
    const long long x = parse_int(key, v);
    if (x < min_value) throw Error(ErrorKind::config, key + " must be >= " + std::to_string(min_value));
    ref(c) = static_cast<Int>(x);
  };
  p.get = [ref](const SimConfig& c) { return std::to_string(ref(const_cast<SimConfig&>(c))); };
  p.values = [ref](const SimConfig& c) { return std::vector<double>{static_cast<double>(ref(const_cast<SimConfig&>(c)))}; };
  return p;
}

ParamSpec boolean(std::string key, std::string section, std::string desc, std::function<bool&(SimConfig&)> ref) {
  ParamSpec p;
  p.key = key;
  p.section = std::move(section);
  p.type = "bool";
  p.description = std::move(desc);
  p.set = [ref, key](SimConfig& c, const std::string& v) { ref(c) = parse_bool(key, v); };
  p.get = [ref](const SimConfig& c) { return std::string(ref(const_cast<SimConfig&>(c)) ? "true" : "false"); };
  p.values = [](const SimConfig&) { return std::vector<double>{}; };
  return p;
}

ParamSpec pair(std::string key, std::string section, std::string desc, std::optional<Interval> range,
               std::function<Interval&(SimConfig&)> ref) {
  ParamSpec p;
  p.key = key;
  p.section = std::move(section);
  p.type = "pair";
  p.description = std::move(desc);
  p.range = range;
  p.set = [ref, key](SimConfig& c, const std::string& v) { ref(c) = parse_pair(key, v); };
  p.get = [ref](const SimConfig& c) { return fmt_pair(ref(const_cast<SimConfig&>(c))); };
  p.values = [ref](const SimConfig& c) {
    const auto& v = ref(const_cast<SimConfig&>(c));
    return std::vector<double>{v.first, v.second};
  };
  return p;
}

ParamSpec theta(std::string key, std::string desc, std::function<ThetaVector&(SimConfig&)> ref) {
  ParamSpec p;
  p.key = key;
  p.section = "sampler";
  p.type = "list";
  p.description = std::move(desc);
  p.set = [ref, key](SimConfig& c, const std::string& v) { ref(c) = parse_theta(key, v); };
  p.get = [ref](const SimConfig& c) { return fmt_list(ref(const_cast<SimConfig&>(c))); };
  p.values = [](const SimConfig&) { return std::vector<double>{}; };
  return p;
}

ParamSpec optional_theta(std::string key, std::string desc, std::function<std::optional<ThetaVector>&(SimConfig&)> ref) {
  ParamSpec p;
  p.key = key;
  p.section = "sampler";
  p.type = "list";
  p.description = std::move(desc);
  p.set = [ref, key](SimConfig& c, const std::string& v) {
    if (trim(v).empty()) {
      ref(c).reset();
    } else {
      ref(c) = parse_theta(key, v);
    }
  };
  p.get = [ref](const SimConfig& c) {
    const auto& o = ref(const_cast<SimConfig&>(c));
    return o ? fmt_list(*o) : std::string();
  };
  p.values = [](const SimConfig&) { return std::vector<double>{}; };
  return p;
}

ParamSpec list(std::string key, std::string section, std::string desc, std::function<std::vector<double>&(SimConfig&)> ref) {
  ParamSpec p;
  p.key = key;
  p.section = std::move(section);
  p.type = "list";
  p.description = std::move(desc);
  p.set = [ref, key](SimConfig& c, const std::string& v) { ref(c) = parse_list(key, v); };
  p.get = [ref](const SimConfig& c) { return fmt_list(ref(const_cast<SimConfig&>(c))); };
  p.values = [](const SimConfig&) { return std::vector<double>{}; };
  return p;
}

std::vector<ParamSpec> build_schema() {
  using I = Interval;
  std::vector<ParamSpec> s;
  // dataset
  s.push_back(integer<int>("num_samples", "dataset", "Recordings generated per batch", std::nullopt,
                           [](SimConfig& c) -> int& { return c.num_samples; }, 1));
  s.push_back(integer<int>("cycles_per_sample", "dataset", "Fetal cycles per recording", std::nullopt,
                           [](SimConfig& c) -> int& { return c.cycles_per_sample; }, 1));
  s.push_back(real("fs", "dataset", "Sample rate (Hz)", I{500, 2000}, [](SimConfig& c) -> double& { return c.fs; }));
  // rates
  s.push_back(real("fhr", "heart", "Fetal heart rate (bpm)", I{120, 160}, [](SimConfig& c) -> double& { return c.fhr; }));
  s.push_back(real("mhr", "heart", "Maternal heart rate (bpm)", I{60, 100}, [](SimConfig& c) -> double& { return c.maternal.mhr; }));
  s.push_back(real("f0_s1", "heart", "Fetal S1 carrier (Hz)", std::nullopt,
                   [](SimConfig& c) -> double& { return c.fetal_events.f0_s1; }));
  s.push_back(real("f0_s2", "heart", "Fetal S2 carrier (Hz)", std::nullopt,
                   [](SimConfig& c) -> double& { return c.fetal_events.f0_s2; }));
  s.push_back(real("attack", "heart", "Event attack time Ta (s)", std::nullopt,
                   [](SimConfig& c) -> double& { return c.fetal_events.attack; }));
  s.push_back(boolean("shared_tau", "heart", "Use one decay constant for S1 and S2",
                      [](SimConfig& c) -> bool& { return c.shared_tau; }));
  // maternal
  s.push_back(real("maternal_scale", "maternal", "Maternal global scale", std::nullopt,
                   [](SimConfig& c) -> double& { return c.maternal.global_scale; }));
  s.push_back(real("maternal_a_s1", "maternal", "Maternal S1 amplitude", std::nullopt,
                   [](SimConfig& c) -> double& { return c.maternal.a_s1; }));
  s.push_back(real("maternal_a_s2", "maternal", "Maternal S2 amplitude", std::nullopt,
                   [](SimConfig& c) -> double& { return c.maternal.a_s2; }));
  s.push_back(real("maternal_tau", "maternal", "Maternal decay constant (s)", std::nullopt,
                   [](SimConfig& c) -> double& { return c.maternal.tau; }));
  s.push_back(real("maternal_delta_t", "maternal", "Maternal S1-S2 interval (s)", std::nullopt,
                   [](SimConfig& c) -> double& { return c.maternal.delta_t; }));
  s.push_back(real("maternal_f0_s1", "maternal", "Maternal S1 carrier (Hz)", std::nullopt,
                   [](SimConfig& c) -> double& { return c.maternal.events.f0_s1; }));
  s.push_back(real("maternal_f0_s2", "maternal", "Maternal S2 carrier (Hz)", std::nullopt,
                   [](SimConfig& c) -> double& { return c.maternal.events.f0_s2; }));
  // transmission
  s.push_back(real("r1", "transmission", "Path 1 distance (m)", I{0.005, 0.02}, [](SimConfig& c) -> double& { return c.transmission.r1; }));
  s.push_back(real("c1", "transmission", "Path 1 sound speed (m/s)", I{1400, 1600}, [](SimConfig& c) -> double& { return c.transmission.c1; }));
  s.push_back(real("beta1", "transmission", "Path 1 decay rate (1/s)", I{50, 150}, [](SimConfig& c) -> double& { return c.transmission.beta1; }));
  s.push_back(real("A1", "transmission", "Path 1 gain", I{0.5, 1.5}, [](SimConfig& c) -> double& { return c.transmission.a1; }));
  s.push_back(real("r2", "transmission", "Path 2 distance (m)", I{0.02, 0.05}, [](SimConfig& c) -> double& { return c.transmission.r2; }));
  s.push_back(real("c2", "transmission", "Path 2 sound speed (m/s)", I{1500, 1600}, [](SimConfig& c) -> double& { return c.transmission.c2; }));
  s.push_back(real("beta2", "transmission", "Path 2 decay rate (1/s)", I{200, 400}, [](SimConfig& c) -> double& { return c.transmission.beta2; }));
  s.push_back(real("A2", "transmission", "Path 2 gain", I{0.5, 1.0}, [](SimConfig& c) -> double& { return c.transmission.a2; }));
  s.push_back(boolean("use_delays", "transmission", "Apply propagation delays r/c",
                      [](SimConfig& c) -> bool& { return c.transmission.use_delays; }));
  // noise
  s.push_back(real("snr_db", "noise", "Cardiac-to-noise ratio (dB), inf disables noise and artifacts", I{5, 20},
                   [](SimConfig& c) -> double& { return c.noise.snr_db; }));
  s.push_back(real("noise_rho", "noise", "AR(1) coefficient", std::nullopt, [](SimConfig& c) -> double& { return c.noise.rho; }));
  s.push_back(real("noise_gamma", "noise", "Gain modulation depth", std::nullopt, [](SimConfig& c) -> double& { return c.noise.gamma; }));
  s.push_back(real("noise_lp_cutoff", "noise", "Gain modulation bandwidth (Hz)", std::nullopt,
                   [](SimConfig& c) -> double& { return c.noise.lp_cutoff; }));
  // movement
  s.push_back(boolean("movement_enabled", "movement", "Fetal movement artifacts", [](SimConfig& c) -> bool& { return c.movement.enabled; }));
  s.push_back(real("movement_intensity", "movement", "Burst intensity", I{1.0, 2.0},
                   [](SimConfig& c) -> double& { return c.movement.intensity; }));
  s.push_back(real("movement_rate_per_min", "movement", "Bursts per minute", I{5, 15},
                   [](SimConfig& c) -> double& { return c.movement.rate_per_min; }));
  s.push_back(pair("movement_duration_range", "movement", "Burst duration range (s)", I{0.1, 0.5},
                   [](SimConfig& c) -> Interval& { return c.movement.duration_range; }));
  s.push_back(pair("movement_band", "movement", "Burst frequency band (Hz)", I{10, 300},
                   [](SimConfig& c) -> Interval& { return c.movement.band; }));
  s.push_back(real("movement_thump_prob", "movement", "Probability of a low-frequency thump", I{0.2, 0.5},
                   [](SimConfig& c) -> double& { return c.movement.thump_prob; }));
  // uterine
  s.push_back(boolean("uc_enabled", "uterine", "Uterine contractions", [](SimConfig& c) -> bool& { return c.uterine.enabled; }));
  s.push_back(real("uc_rate_per_10min", "uterine", "Contractions per 10 min", I{2, 6},
                   [](SimConfig& c) -> double& { return c.uterine.rate_per_10min; }));
  s.push_back(pair("uc_duration_range", "uterine", "Contraction duration range (s)", I{5, 30},
                   [](SimConfig& c) -> Interval& { return c.uterine.duration_range; }));
  s.push_back(pair("uc_rise_fall_frac", "uterine", "Rise and fall fractions", I{0.3, 0.4},
                   [](SimConfig& c) -> Interval& { return c.uterine.rise_fall_frac; }));
  s.push_back(real("uc_attenuation", "uterine", "Peak cardiac attenuation", I{0.3, 0.6},
                   [](SimConfig& c) -> double& { return c.uterine.attenuation; }));
  s.push_back(pair("uc_noise_band", "uterine", "Contraction noise band (Hz)", I{0.5, 20},
                   [](SimConfig& c) -> Interval& { return c.uterine.noise_band; }));
  s.push_back(real("uc_noise_intensity", "uterine", "Contraction noise intensity", I{0.5, 1.0},
                   [](SimConfig& c) -> double& { return c.uterine.noise_intensity; }));
  // hrv
  {
    ParamSpec p;
    p.key = "rr_mode";
    p.section = "hrv";
    p.type = "choice";
    p.description = "RR series mode";
    p.choices = {"constant", "explicit", "weak_hrv"};
    p.set = [](SimConfig& c, const std::string& v) {
      try {
        c.rr_mode = parse_rr_mode(trim(v));
      } catch (const Error&) {
        bad_value("rr_mode", v, "one of constant, explicit, weak_hrv");
      }
    };
    p.get = [](const SimConfig& c) { return to_string(c.rr_mode); };
    p.values = [](const SimConfig&) { return std::vector<double>{}; };
    s.push_back(p);
  }
  s.push_back(real("hrv_alpha", "hrv", "Drift scale (s)", std::nullopt, [](SimConfig& c) -> double& { return c.hrv.alpha; }));
  s.push_back(real("hrv_jitter_std", "hrv", "Jitter std (s)", std::nullopt, [](SimConfig& c) -> double& { return c.hrv.jitter_std; }));
  s.push_back(integer<int>("hrv_window", "hrv", "Drift smoothing window (cycles)", std::nullopt,
                           [](SimConfig& c) -> int& { return c.hrv.drift_window; }, 1));
  s.push_back(real("rr_min", "hrv", "Lowest plausible RR (s)", std::nullopt, [](SimConfig& c) -> double& { return c.hrv.rr_min; }));
  s.push_back(real("rr_max", "hrv", "Highest plausible RR (s)", std::nullopt, [](SimConfig& c) -> double& { return c.hrv.rr_max; }));
  s.push_back(list("rr_series", "hrv", "Explicit RR series (s), tiled", [](SimConfig& c) -> std::vector<double>& { return c.hrv.explicit_rr; }));
  // sampler
  {
    ParamSpec p;
    p.key = "prior";
    p.section = "sampler";
    p.type = "choice";
    p.description = "Per-cycle sampling mode";
    p.choices = {"uniform", "truncated_gaussian", "ensemble_mcmc"};
    p.set = [](SimConfig& c, const std::string& v) {
      try {
        c.prior.kind = parse_prior_kind(trim(v));
      } catch (const Error&) {
        bad_value("prior", v, "one of uniform, truncated_gaussian, ensemble_mcmc");
      }
    };
    p.get = [](const SimConfig& c) { return to_string(c.prior.kind); };
    p.values = [](const SimConfig&) { return std::vector<double>{}; };
    s.push_back(p);
  }
  s.push_back(theta("box_lower", "Sampling box lower corner", [](SimConfig& c) -> ThetaVector& { return c.box.lower; }));
  s.push_back(theta("box_upper", "Sampling box upper corner", [](SimConfig& c) -> ThetaVector& { return c.box.upper; }));
  s.push_back(optional_theta("prior_mean", "Truncated Gaussian mean (default box midpoint)",
                             [](SimConfig& c) -> std::optional<ThetaVector>& { return c.prior.mean; }));
  s.push_back(optional_theta("prior_std", "Truncated Gaussian std (default box width / 4)",
                             [](SimConfig& c) -> std::optional<ThetaVector>& { return c.prior.std; }));
  s.push_back(integer<std::size_t>("mcmc_walkers", "sampler", "Ensemble walkers", std::nullopt,
                                   [](SimConfig& c) -> std::size_t& { return c.prior.walkers; }, 2));
  s.push_back(integer<std::size_t>("mcmc_burn_in", "sampler", "Ensemble burn-in steps", std::nullopt,
                                   [](SimConfig& c) -> std::size_t& { return c.prior.burn_in; }, 0));
  s.push_back(integer<std::size_t>("mcmc_thin", "sampler", "Ensemble thinning", std::nullopt,
                                   [](SimConfig& c) -> std::size_t& { return c.prior.thin; }, 1));
  s.push_back(boolean("stabilize_delta_t", "sampler", "Bootstrap dT from delta_t_measured",
                      [](SimConfig& c) -> bool& { return c.stabilize_delta_t; }));
  s.push_back(list("delta_t_measured", "sampler", "Measured dT values (s) for the bootstrap",
                   [](SimConfig& c) -> std::vector<double>& { return c.delta_t_measured; }));
  // run
  s.push_back(integer<std::uint64_t>("seed", "run", "Master seed", std::nullopt,
                                     [](SimConfig& c) -> std::uint64_t& { return c.seed; }, 0));
  {
    ParamSpec p;
    p.key = "preset";
    p.section = "run";
    p.type = "string";
    p.description = "Preset the configuration is based on";
    p.set = [](SimConfig& c, const std::string& v) { c.preset = trim(v); };
    p.get = [](const SimConfig& c) { return c.preset; };
    p.values = [](const SimConfig&) { return std::vector<double>{}; };
    s.push_back(p);
  }
  return s;
}

std::string strip_comments(std::string_view text) {
  std::string out;
  std::istringstream is{std::string(text)};
  std::string line;
  while (std::getline(is, line)) {
    const auto pos = line.find_first_of("#;");
    if (pos != std::string::npos) line.erase(pos);
    out += line;
    out += '\n';
  }
  return out;
}

using KeyValues = std::vector<std::pair<std::string, std::string>>;

KeyValues parse_ini(std::string_view text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream is(strip_comments(text));
  try {
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorKind::config, std::string("malformed INI: ") + e.what());
  }
  KeyValues kv;
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      kv.emplace_back(name, node.data());
      continue;
    }
    for (const auto& [key, leaf] : node) {
      if (name == "preset" && key == "description") continue;
      kv.emplace_back(key, leaf.data());
    }
  }
  return kv;
}

void check_range(const ParamSpec& p, const SimConfig& cfg, bool strict) {
  if (!p.range) return;
  for (double v : p.values(cfg)) {
    if (v < p.range->first || v > p.range->second) {
      std::ostringstream os;
      os << p.key << "=" << p.get(cfg) << " outside suggested range [" << fmt(p.range->first) << ", "
         << fmt(p.range->second) << "]";
      if (strict) throw Error(ErrorKind::config, os.str());
      warn(os.str());
      return;
    }
  }
}

SimConfig apply_ini(SimConfig cfg, const KeyValues& kv, const LoadOptions& opt) {
  for (const auto& [key, value] : kv) {
    if (key == "preset") continue;
    const ParamSpec* p = find_param(key);
    if (!p) {
      warn("unknown configuration key '" + key + "' ignored");
      continue;
    }
    p->set(cfg, value);
    check_range(*p, cfg, opt.strict);
  }
  return cfg;
}

std::string description_of(std::string_view text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream is(strip_comments(text));
  try {
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorKind::config, std::string("malformed preset: ") + e.what());
  }
  return tree.get<std::string>("preset.description", "");
}

}  // namespace

const std::vector<ParamSpec>& config_schema() {
  static const std::vector<ParamSpec> schema = build_schema();
  return schema;
}

const ParamSpec* find_param(std::string_view key) {
  for (const auto& p : config_schema()) {
    if (p.key == key) return &p;
  }
  return nullptr;
}

SimConfig load_config(std::string_view text, const LoadOptions& opt) {
  const KeyValues kv = parse_ini(text);
  SimConfig base;
  for (const auto& [key, value] : kv) {
    if (key == "preset") base = preset_config(trim(value));
  }
  SimConfig cfg = apply_ini(base, kv, opt);
  validate(cfg);
  return cfg;
}

SimConfig load_config_file(const std::filesystem::path& path, const LoadOptions& opt) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open config " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return load_config(os.str(), opt);
}

std::string serialize_config(const SimConfig& cfg) {
  std::ostringstream os;
  std::string section;
  for (const auto& p : config_schema()) {
    if (p.section != section) {
      if (!section.empty()) os << '\n';
      section = p.section;
      os << '[' << section << "]\n";
    }
    os << p.key << " = " << p.get(cfg) << '\n';
  }
  return os.str();
}

void apply_override(SimConfig& cfg, const std::string& key, const std::string& value, bool strict) {
  const ParamSpec* p = find_param(key);
  if (!p) throw Error(ErrorKind::config, "unknown parameter '" + key + "'");
  if (key == "preset") {
    const SimConfig base = preset_config(trim(value));
    const std::uint64_t seed = cfg.seed;
    cfg = base;
    cfg.seed = seed;
    return;
  }
  p->set(cfg, value);
  check_range(*p, cfg, strict);
}

std::vector<std::string> range_violations(const SimConfig& cfg) {
  std::vector<std::string> out;
  for (const auto& p : config_schema()) {
    if (!p.range) continue;
    for (double v : p.values(cfg)) {
      if (v < p.range->first || v > p.range->second) {
        out.push_back(p.key + "=" + p.get(cfg) + " outside suggested range [" + fmt(p.range->first) + ", " +
                      fmt(p.range->second) + "]");
        break;
      }
    }
  }
  return out;
}

void validate(const SimConfig& cfg) {
  auto fail = [](const std::string& m) { throw Error(ErrorKind::config, m); };
  if (cfg.num_samples < 1) fail("num_samples must be >= 1");
  if (cfg.cycles_per_sample < 1) fail("cycles_per_sample must be >= 1");
  if (!(cfg.fs > 0.0) || !std::isfinite(cfg.fs)) fail("fs must be positive");
  if (!(cfg.fhr > 0.0) || !std::isfinite(cfg.fhr)) fail("fhr must be positive");
  const double rr = 60.0 / cfg.fhr;
  if (rr < cfg.hrv.rr_min || rr > cfg.hrv.rr_max) {
    std::ostringstream os;
    os << "fhr " << cfg.fhr << " bpm gives RR " << rr << " s outside [" << cfg.hrv.rr_min << ", " << cfg.hrv.rr_max << "]";
    fail(os.str());
  }
  const double f0_max = std::max({cfg.fetal_events.f0_s1, cfg.fetal_events.f0_s2, cfg.maternal.events.f0_s1,
                                  cfg.maternal.events.f0_s2});
  if (!(cfg.fetal_events.f0_s1 > 0.0) || !(cfg.fetal_events.f0_s2 > 0.0)) fail("fetal carriers must be positive");
  if (!(cfg.fetal_events.attack > 0.0)) fail("attack must be positive");
  if (cfg.fs < 4.0 * f0_max) {
    std::ostringstream os;
    os << "fs " << cfg.fs << " Hz below 4 x highest carrier (" << f0_max << " Hz)";
    throw Error(ErrorKind::aliasing, os.str());
  }
  if (cfg.box.upper[4] >= rr) {
    std::ostringstream os;
    os << "sampling box dT upper bound " << cfg.box.upper[4] << " s is not below RR " << rr << " s";
    throw Error(ErrorKind::cycle_geometry, os.str());
  }
  if (cfg.stabilize_delta_t && cfg.delta_t_measured.empty()) fail("stabilize_delta_t needs delta_t_measured values");
  HRVConfig h = cfg.hrv;
  h.mean_rr = rr;
  validate(h, cfg.rr_mode);
  validate(cfg.box);
  validate(cfg.maternal);
  validate(cfg.transmission);
  validate(cfg.noise, cfg.fs);
  validate(cfg.movement, cfg.fs);
  validate(cfg.uterine, cfg.fs);
  if (cfg.prior.kind == PriorKind::ensemble_mcmc && cfg.prior.walkers < 2 * kThetaDim) {
    fail("mcmc_walkers must be >= 10");
  }
}

const std::vector<Preset>& presets() {
  static const std::vector<Preset> list = [] {
    std::vector<Preset> v;
    for (std::size_t i = 0; i < kEmbeddedPresetCount; ++i) {
      v.push_back({kEmbeddedPresets[i].name, description_of(kEmbeddedPresets[i].text), kEmbeddedPresets[i].text});
    }
    std::stable_sort(v.begin(), v.end(), [](const Preset& a, const Preset& b) {
      if ((a.name == "normal") != (b.name == "normal")) return a.name == "normal";
      return a.name < b.name;
    });
    return v;
  }();
  return list;
}

const Preset& find_preset(std::string_view name) {
  for (const auto& p : presets()) {
    if (p.name == name) return p;
  }
  std::string known;
  for (const auto& p : presets()) known += (known.empty() ? "" : ", ") + p.name;
  throw Error(ErrorKind::config, "unknown preset '" + std::string(name) + "' (known: " + known + ")");
}

SimConfig preset_config(std::string_view name) {
  const Preset& p = find_preset(name);
  SimConfig cfg = apply_ini(SimConfig{}, parse_ini(p.text), LoadOptions{true});
  cfg.preset = p.name;
  return cfg;
}

}  // namespace fpcg
