#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fpcg/kernel.hpp"
#include "fpcg/signal.hpp"

namespace fpcg {

inline constexpr std::size_t kThetaDim = 5;
using ThetaVector = std::array<double, kThetaDim>;

/// Per-cycle fetal parameters, in the fixed order (A_S1, A_S2, tau_S1, tau_S2, dT).
struct CycleTheta {
  double a_s1 = 1.0;
  double a_s2 = 0.6;
  double tau_s1 = 0.02;
  double tau_s2 = 0.02;
  double delta_t = 0.2;  // S1 onset -> S2 onset, s

  ThetaVector to_array() const { return {a_s1, a_s2, tau_s1, tau_s2, delta_t}; }
  static CycleTheta from_array(const ThetaVector& v) { return {v[0], v[1], v[2], v[3], v[4]}; }
  friend bool operator==(const CycleTheta&, const CycleTheta&) = default;
};

/// Component names in vector order: "A_S1", "A_S2", "tau_S1", "tau_S2", "deltaT".
const std::array<std::string, kThetaDim>& theta_names();

/// Throws ErrorKind::parameter_domain unless every field is > 0.
void validate(const CycleTheta& theta);

/// Both decay constants replaced by their mean; amplitudes and dT untouched.
CycleTheta apply_shared_tau(CycleTheta theta);

enum class RRMode { constant, explicit_series, weak_hrv };

std::string to_string(RRMode mode);
RRMode parse_rr_mode(const std::string& text);

struct RRSeries {
  std::vector<double> rr;  // seconds
  RRMode mode = RRMode::constant;
};

/// Weak heart-rate variability: RR_k = mean_rr + alpha d_k + eta_k, where d_k
/// is a centred moving average of i.i.d. N(0,1) rescaled to unit variance and
/// eta_k ~ N(0, jitter_std^2). Values are clipped into [rr_min, rr_max].
struct HRVConfig {
  double mean_rr = 60.0 / 140.0;
  double alpha = 0.01;
  double jitter_std = 0.004;
  int drift_window = 10;
  double rr_min = 0.25;
  double rr_max = 0.90;
  std::vector<double> explicit_rr;  // tiled to n cycles in explicit mode

  friend bool operator==(const HRVConfig&, const HRVConfig&) = default;
};

void validate(const HRVConfig& cfg, RRMode mode);

/// Deterministic given seed. The drift and jitter draws come from separate
/// streams, so alpha only scales the drift term.
RRSeries make_rr_series(RRMode mode, const HRVConfig& cfg, std::size_t n_cycles, std::uint64_t seed);

/// t_1 = 0, t_{k+1} = t_k + rr_k. Returns one onset per RR value.
std::vector<double> onset_times(const RRSeries& rr);

/// Sample index of each rendered cycle onset: prefix sums of round(rr_k fs).
std::vector<std::size_t> cycle_onset_samples(const RRSeries& rr, double fs);

/// Fixed kernel hyperparameters of a two-event source.
struct EventPair {
  double f0_s1 = 40.0;
  double f0_s2 = 55.0;
  double attack = kDefaultAttack;

  friend bool operator==(const EventPair&, const EventPair&) = default;
};

/// One cycle of `n_samples`: S1 at sample 0 and S2 at round(dT fs), each a
/// render_event buffer, truncated at the cycle end. Events with zero
/// amplitude are skipped. This is the single rendering path for both the
/// fetal and the maternal train.
Signal render_cycle(const CycleTheta& theta, const EventPair& events, double fs, std::size_t n_samples);

struct FetalTrainOptions {
  EventPair events;
  bool shared_tau = false;

  friend bool operator==(const FetalTrainOptions&, const FetalTrainOptions&) = default;
};

/// Renders every cycle on the nominal grid round(mean(rr) fs), stretches it to
/// round(rr_k fs) samples by band-limited resampling and concatenates.
/// Throws ErrorKind::cycle_geometry naming the cycle when dT_k >= rr_k or S2
/// falls outside the nominal cycle.
Signal render_fetal_train(std::span<const CycleTheta> thetas, const RRSeries& rr, const FetalTrainOptions& opt,
                          double fs);

/// Nuisance maternal source: fixed event hyperparameters, constant rate.
struct MaternalConfig {
  double mhr = 80.0;  // bpm
  double a_s1 = 1.0;
  double a_s2 = 0.7;
  double tau = 0.04;
  double delta_t = 0.30;
  EventPair events{12.0, 18.0, kDefaultAttack};
  double global_scale = 0.3;

  friend bool operator==(const MaternalConfig&, const MaternalConfig&) = default;
};

void validate(const MaternalConfig& cfg);

/// Maternal beat onsets l * 60 / mhr inside [0, duration).
std::vector<double> maternal_onsets(const MaternalConfig& cfg, double duration);

/// Output length round(duration fs). Each beat is one render_cycle of
/// round(60/mhr fs) samples placed at round(onset fs), scaled by global_scale.
Signal render_maternal_train(const MaternalConfig& cfg, double duration, double fs);

}  // namespace fpcg
