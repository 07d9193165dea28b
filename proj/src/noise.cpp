#include "fpcg/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "fpcg/error.hpp"
#include "fpcg/fft.hpp"
#include "fpcg/kernel.hpp"

namespace fpcg {

namespace {

void check_interval(const Interval& iv, const char* name, bool allow_equal) {
  const bool ok = allow_equal ? iv.first <= iv.second : iv.first < iv.second;
  if (!ok || !std::isfinite(iv.first) || !std::isfinite(iv.second)) {
    std::ostringstream os;
    os << name << " must be an ascending pair, got (" << iv.first << ", " << iv.second << ")";
    throw Error(ErrorKind::config, os.str());
  }
}

double uniform_in(const Interval& iv, Rng& rng) {
  if (iv.first == iv.second) return iv.first;
  return std::uniform_real_distribution<double>(iv.first, iv.second)(rng);
}

// Sorted Poisson-process event starts on [0, duration).
std::vector<double> poisson_starts(double rate_per_s, double duration, Rng& rng) {
  const double lambda = rate_per_s * duration;
  if (!(lambda > 0.0)) return {};
  const int count = std::poisson_distribution<int>(lambda)(rng);
  std::uniform_real_distribution<double> u(0.0, duration);
  std::vector<double> starts(static_cast<std::size_t>(count));
  for (double& s : starts) s = u(rng);
  std::sort(starts.begin(), starts.end());
  return starts;
}

double hann(std::size_t i, std::size_t n) {
  if (n <= 1) return 0.0;
  return 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1));
}

}  // namespace

void validate(const NoiseConfig& cfg, double fs) {
  if (!(std::abs(cfg.rho) < 1.0)) throw Error(ErrorKind::instability, "noise rho must satisfy |rho| < 1");
  if (!(cfg.gamma >= 0.0)) throw Error(ErrorKind::config, "noise gamma must be >= 0");
  if (!(cfg.lp_cutoff > 0.0) || !(cfg.lp_cutoff < 0.5 * fs)) {
    throw Error(ErrorKind::config, "noise lp_cutoff must lie in (0, fs/2)");
  }
  if (std::isnan(cfg.snr_db) || cfg.snr_db == -INFINITY) throw Error(ErrorKind::config, "snr_db must be a number or +inf");
}

Signal ar1_noise(double rho, std::size_t n, double fs, std::uint64_t seed) {
  if (!(std::abs(rho) < 1.0)) {
    std::ostringstream os;
    os << "ar1_noise: |rho| = " << std::abs(rho) << " must be < 1";
    throw Error(ErrorKind::instability, os.str());
  }
  if (n == 0) throw Error(ErrorKind::parameter_domain, "ar1_noise: n must be >= 1");
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double innov = std::sqrt(1.0 - rho * rho);
  Signal out(n, fs);
  out[0] = normal(rng);
  for (std::size_t t = 1; t < n; ++t) out[t] = rho * out[t - 1] + innov * normal(rng);
  return out;
}

std::vector<double> lowpass_noise(std::size_t n, double cutoff_hz, double fs, std::uint64_t seed) {
  if (n == 0) return {};
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> w(n);
  for (double& v : w) v = normal(rng);
  auto spec = rfft(w);
  spec[0] = 0.0;
  for (std::size_t k = 1; k < spec.size(); ++k) {
    if (static_cast<double>(k) * fs / static_cast<double>(n) > cutoff_hz) spec[k] = 0.0;
  }
  auto lp = irfft(spec, n);
  const double s = rms(lp);
  if (s == 0.0) return std::vector<double>(n, 0.0);
  for (double& v : lp) v /= s;
  return lp;
}

std::vector<double> band_limited_noise(std::size_t n, double low_hz, double high_hz, double fs, Rng& rng) {
  if (n == 0) return {};
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> w(n);
  for (double& v : w) v = normal(rng);
  auto spec = rfft(w);
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double f = static_cast<double>(k) * fs / static_cast<double>(n);
    if (f < low_hz || f > high_hz) spec[k] = 0.0;
  }
  auto out = irfft(spec, n);
  const double s = rms(out);
  if (s == 0.0) return std::vector<double>(n, 0.0);
  for (double& v : out) v /= s;
  return out;
}

Signal gain_modulate(const Signal& noise, double gamma, double lp_cutoff, std::uint64_t seed) {
  if (!(gamma >= 0.0)) throw Error(ErrorKind::parameter_domain, "gain_modulate: gamma must be >= 0");
  if (gamma == 0.0) return noise;
  const auto lp = lowpass_noise(noise.size(), lp_cutoff, noise.fs, seed);
  Signal out(noise.size(), noise.fs);
  for (std::size_t i = 0; i < noise.size(); ++i) out[i] = (1.0 + gamma * lp[i]) * noise[i];
  return out;
}

SnrMix mix_with_snr(const Signal& x_c, const Signal& noise, double snr_db) {
  if (x_c.size() != noise.size()) throw Error(ErrorKind::parameter_domain, "mix_with_snr: length mismatch");
  if (std::isnan(snr_db) || snr_db == -INFINITY) throw Error(ErrorKind::parameter_domain, "mix_with_snr: invalid SNR");
  const double ref = rms(x_c.samples);
  SnrMix out;
  if (snr_db == INFINITY) {
    out.sigma_n = 0.0;
  } else {
    if (ref == 0.0) throw Error(ErrorKind::snr_undefined, "mix_with_snr: reference signal is silent, SNR undefined");
    out.sigma_n = ref / std::pow(10.0, snr_db / 20.0);
  }
  out.scaled_noise = Signal(noise.size(), x_c.fs);
  out.mixture = Signal(noise.size(), x_c.fs);
  for (std::size_t i = 0; i < noise.size(); ++i) {
    out.scaled_noise[i] = out.sigma_n * noise[i];
    out.mixture[i] = x_c[i] + out.scaled_noise[i];
  }
  return out;
}

void validate(const MovementConfig& cfg, double fs) {
  if (!(cfg.intensity >= 0.0)) throw Error(ErrorKind::config, "movement_intensity must be >= 0");
  if (!(cfg.rate_per_min >= 0.0)) throw Error(ErrorKind::config, "movement_rate_per_min must be >= 0");
  check_interval(cfg.duration_range, "movement_duration_range", true);
  if (!(cfg.duration_range.first > 0.0)) throw Error(ErrorKind::config, "movement durations must be > 0");
  check_interval(cfg.band, "movement_band", false);
  if (!(cfg.band.first > 0.0) || !(cfg.band.first < 0.5 * fs)) {
    throw Error(ErrorKind::config, "movement_band lower edge must lie in (0, fs/2)");
  }
  if (!(cfg.thump_prob >= 0.0 && cfg.thump_prob <= 1.0)) throw Error(ErrorKind::config, "movement_thump_prob must be in [0, 1]");
}

MovementTrack movement_artifacts(const MovementConfig& cfg, double duration, double fs, std::uint64_t seed,
                                 double reference_level) {
  validate(cfg, fs);
  MovementTrack track;
  track.signal = Signal(static_cast<std::size_t>(std::lround(duration * fs)), fs);
  if (!cfg.enabled) return track;
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto& out = track.signal.samples;
  for (double start : poisson_starts(cfg.rate_per_min / 60.0, duration, rng)) {
    ArtifactEvent ev;
    ev.start = start;
    ev.duration = uniform_in(cfg.duration_range, rng);
    ev.thump = unit(rng) < cfg.thump_prob;
    const auto i0 = static_cast<std::size_t>(std::lround(start * fs));
    const auto len = static_cast<std::size_t>(std::lround(ev.duration * fs));
    const auto burst = band_limited_noise(len, cfg.band.first, cfg.band.second, fs, rng);
    const double gain = cfg.intensity * reference_level;
    for (std::size_t i = 0; i < len && i0 + i < out.size(); ++i) out[i0 + i] += gain * hann(i, len) * burst[i];
    if (ev.thump) {
      const double f0 = 4.0 + 16.0 * unit(rng);
      const double tau = 0.03 + 0.05 * unit(rng);
      const auto offset = static_cast<std::size_t>(0.3 * unit(rng) * static_cast<double>(len));
      if (gain > 0.0) {
        const Signal thump = render_event({2.0 * gain, f0, 0.01, tau}, fs);
        for (std::size_t i = 0; i < thump.size() && offset + i < len && i0 + offset + i < out.size(); ++i) {
          out[i0 + offset + i] += thump[i];
        }
      }
    }
    track.events.push_back(ev);
  }
  return track;
}

void validate(const UterineConfig& cfg, double fs) {
  if (!(cfg.rate_per_10min >= 0.0)) throw Error(ErrorKind::config, "uc_rate_per_10min must be >= 0");
  check_interval(cfg.duration_range, "uc_duration_range", true);
  if (!(cfg.duration_range.first > 0.0)) throw Error(ErrorKind::config, "uc durations must be > 0");
  if (!(cfg.rise_fall_frac.first >= 0.0) || !(cfg.rise_fall_frac.second >= 0.0) ||
      cfg.rise_fall_frac.first + cfg.rise_fall_frac.second > 1.0) {
    throw Error(ErrorKind::config, "uc_rise_fall_frac entries must be >= 0 and sum to <= 1");
  }
  if (!(cfg.attenuation >= 0.0 && cfg.attenuation < 1.0)) throw Error(ErrorKind::config, "uc_attenuation must be in [0, 1)");
  check_interval(cfg.noise_band, "uc_noise_band", false);
  if (!(cfg.noise_band.first >= 0.0) || !(cfg.noise_band.first < 0.5 * fs)) {
    throw Error(ErrorKind::config, "uc_noise_band lower edge must lie in [0, fs/2)");
  }
  if (!(cfg.noise_intensity >= 0.0)) throw Error(ErrorKind::config, "uc_noise_intensity must be >= 0");
}

UterineTrack uterine_contraction_track(const UterineConfig& cfg, double duration, double fs, std::uint64_t seed,
                                       double reference_level) {
  validate(cfg, fs);
  const auto n = static_cast<std::size_t>(std::lround(duration * fs));
  UterineTrack track;
  track.attenuation = Signal(n, fs);
  track.noise = Signal(n, fs);
  if (!cfg.enabled) return track;
  Rng rng(seed);
  std::vector<double> shape(n, 0.0);
  for (double start : poisson_starts(cfg.rate_per_10min / 600.0, duration, rng)) {
    Contraction c;
    c.start = start;
    c.duration = uniform_in(cfg.duration_range, rng);
    c.rise = cfg.rise_fall_frac.first * c.duration;
    c.fall = cfg.rise_fall_frac.second * c.duration;
    const double end = c.start + c.duration;
    const auto i0 = static_cast<std::size_t>(std::ceil(c.start * fs));
    for (std::size_t i = i0; i < n; ++i) {
      const double t = static_cast<double>(i) / fs;
      if (t >= end) break;
      const double u = t - c.start;
      double v = 1.0;
      if (u < c.rise) v = u / c.rise;
      else if (t > end - c.fall) v = (end - t) / c.fall;
      shape[i] = std::max(shape[i], std::clamp(v, 0.0, 1.0));
    }
    track.events.push_back(c);
  }
  Rng noise_rng(seed ^ 0x5bd1e9955bd1e995ULL);
  const auto bl = track.events.empty() ? std::vector<double>(n, 0.0)
                                       : band_limited_noise(n, cfg.noise_band.first, cfg.noise_band.second, fs, noise_rng);
  const double gain = cfg.noise_intensity * reference_level;
  for (std::size_t i = 0; i < n; ++i) {
    track.attenuation[i] = cfg.attenuation * shape[i];
    track.noise[i] = gain * shape[i] * bl[i];
  }
  return track;
}

}  // namespace fpcg
