#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fpcg/heart_source.hpp"
#include "fpcg/noise.hpp"
#include "fpcg/sampler.hpp"
#include "fpcg/transmission.hpp"

namespace fpcg {

/// Everything that drives one deterministic synthesis run.
struct SimConfig {
  // dataset
  int num_samples = 10;          // files in a batch
  int cycles_per_sample = 100;   // fetal cycles per file
  double fs = 1000.0;
  // rates and fetal source
  double fhr = 140.0;
  EventPair fetal_events;
  bool shared_tau = false;
  RRMode rr_mode = RRMode::constant;
  HRVConfig hrv;  // mean_rr follows fhr at synthesis time
  // per-cycle sampling
  PriorSpec prior;
  ParamBounds box = default_sampling_box();
  bool stabilize_delta_t = false;
  std::vector<double> delta_t_measured;
  // other sources and channel
  MaternalConfig maternal;
  TransmissionConfig transmission;
  NoiseConfig noise;
  MovementConfig movement;
  UterineConfig uterine;
  // run
  std::uint64_t seed = 0;
  std::string preset = "normal";

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

/// One configurable parameter. The schema table is the only place keys,
/// defaults and suggested ranges are defined; INI, CLI --set, API overrides
/// and the preset catalog all go through it.
struct ParamSpec {
  std::string key;
  std::string section;
  std::string type;  // float | int | bool | choice | pair | list | string
  std::string description;
  std::optional<Interval> range;     // suggested range, applied to every numeric value
  std::vector<std::string> choices;  // for type == choice
  std::function<void(SimConfig&, const std::string&)> set;
  std::function<std::string(const SimConfig&)> get;
  std::function<std::vector<double>(const SimConfig&)> values;  // numeric view for range checks
};

const std::vector<ParamSpec>& config_schema();
const ParamSpec* find_param(std::string_view key);

struct LoadOptions {
  bool strict = false;  // out-of-range values are errors instead of warnings
};

/// INI text ('#' and ';' comments, optional [sections]; keys are unique
/// across sections). A `preset` key selects the base the other keys modify.
/// Unknown keys warn; malformed lines and type mismatches throw
/// ErrorKind::config.
SimConfig load_config(std::string_view text, const LoadOptions& opt = {});
SimConfig load_config_file(const std::filesystem::path& path, const LoadOptions& opt = {});

/// INI text with every schema key; load_config(serialize_config(c)) == c.
std::string serialize_config(const SimConfig& cfg);

/// Sets one key from its text form. Unknown key, bad value or (strict) an
/// out-of-range value throw ErrorKind::config; the message names the key.
void apply_override(SimConfig& cfg, const std::string& key, const std::string& value, bool strict = false);

/// "key=value outside suggested range [lo, hi]" for every offending key.
std::vector<std::string> range_violations(const SimConfig& cfg);

/// Hard invariants (rates, fs >= 4 max(f0), sub-config validity).
void validate(const SimConfig& cfg);

struct Preset {
  std::string name;
  std::string description;
  std::string text;  // INI diff over the defaults
};

const std::vector<Preset>& presets();
const Preset& find_preset(std::string_view name);
SimConfig preset_config(std::string_view name);

}  // namespace fpcg
