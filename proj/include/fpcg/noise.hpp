#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fpcg/seed.hpp"
#include "fpcg/signal.hpp"

namespace fpcg {

using Interval = std::pair<double, double>;

struct NoiseConfig {
  double rho = 0.95;        // AR(1) coefficient
  double gamma = 0.3;       // gain-modulation depth
  double lp_cutoff = 0.5;   // Hz, bandwidth of the gain envelope
  double snr_db = 10.0;     // +inf disables every noise-like component

  friend bool operator==(const NoiseConfig&, const NoiseConfig&) = default;
};

void validate(const NoiseConfig& cfg, double fs);

/// n_t = rho n_{t-1} + sqrt(1 - rho^2) e_t, n_0 ~ N(0, 1): stationary with
/// unit variance from the first sample. Throws ErrorKind::instability when
/// |rho| >= 1.
Signal ar1_noise(double rho, std::size_t n, double fs, std::uint64_t seed);

/// Zero-mean, unit-variance white noise low-passed by zeroing every DFT bin
/// above `cutoff_hz` (and the DC bin). All zeros when no bin survives.
std::vector<double> lowpass_noise(std::size_t n, double cutoff_hz, double fs, std::uint64_t seed);

/// Unit-RMS white noise restricted to [low_hz, high_hz] in the DFT domain;
/// band edges above Nyquist are limited to Nyquist.
std::vector<double> band_limited_noise(std::size_t n, double low_hz, double high_hz, double fs, Rng& rng);

/// noise * g with g = 1 + gamma LP{w}, LP{w} = lowpass_noise(...).
Signal gain_modulate(const Signal& noise, double gamma, double lp_cutoff, std::uint64_t seed);

struct SnrMix {
  Signal mixture;       // x_c + sigma_n * noise
  Signal scaled_noise;  // sigma_n * noise
  double sigma_n = 0.0;
};

/// sigma_n = RMS(x_c) / 10^(snr_db / 20). snr_db = +inf gives sigma_n = 0.
/// Throws ErrorKind::snr_undefined when x_c is silent and snr_db is finite.
SnrMix mix_with_snr(const Signal& x_c, const Signal& noise, double snr_db);

struct MovementConfig {
  bool enabled = true;
  double intensity = 1.3;
  double rate_per_min = 8.0;
  Interval duration_range{0.12, 0.45};
  Interval band{15.0, 200.0};
  double thump_prob = 0.35;

  friend bool operator==(const MovementConfig&, const MovementConfig&) = default;
};

void validate(const MovementConfig& cfg, double fs);

struct ArtifactEvent {
  double start = 0.0;     // s
  double duration = 0.0;  // s
  bool thump = false;
};

struct MovementTrack {
  Signal signal;
  std::vector<ArtifactEvent> events;
};

/// Fetal-movement bursts. Event count ~ Poisson(rate * duration), starts
/// uniform on [0, duration), durations uniform on duration_range. Each burst is
/// unit-RMS band-limited noise under a Hann window, times intensity; with
/// probability thump_prob a low-frequency (4-20 Hz) damped transient of peak
/// 2 * intensity is added inside the same support. Everything is scaled by
/// `reference_level` and is exactly zero outside the event supports.
MovementTrack movement_artifacts(const MovementConfig& cfg, double duration, double fs, std::uint64_t seed,
                                 double reference_level = 1.0);

struct UterineConfig {
  bool enabled = true;
  double rate_per_10min = 4.0;
  Interval duration_range{10.0, 25.0};
  Interval rise_fall_frac{0.35, 0.35};
  double attenuation = 0.45;
  Interval noise_band{0.5, 18.0};
  double noise_intensity = 0.8;

  friend bool operator==(const UterineConfig&, const UterineConfig&) = default;
};

void validate(const UterineConfig& cfg, double fs);

struct Contraction {
  double start = 0.0;
  double duration = 0.0;
  double rise = 0.0;  // s
  double fall = 0.0;  // s
};

struct UterineTrack {
  Signal attenuation;  // in [0, attenuation); cardiac is multiplied by (1 - this)
  Signal noise;        // band-limited noise gated by the same trapezoids
  std::vector<Contraction> events;
};

/// Contractions with Poisson count at rate_per_10min / 600 s. Each is a
/// trapezoid (linear rise, plateau, linear fall) of unit height; overlapping
/// contractions combine by maximum. attenuation = depth * shape and
/// noise = noise_intensity * reference_level * shape * band_limited_noise.
UterineTrack uterine_contraction_track(const UterineConfig& cfg, double duration, double fs, std::uint64_t seed,
                                       double reference_level = 1.0);

}  // namespace fpcg
