#include "fpcg/heart_source.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "fpcg/error.hpp"
#include "fpcg/resample.hpp"
#include "fpcg/seed.hpp"

namespace fpcg {

const std::array<std::string, kThetaDim>& theta_names() {
  static const std::array<std::string, kThetaDim> names{"A_S1", "A_S2", "tau_S1", "tau_S2", "deltaT"};
  return names;
}

void validate(const CycleTheta& theta) {
  const auto v = theta.to_array();
  for (std::size_t i = 0; i < kThetaDim; ++i) {
    if (!(v[i] > 0.0) || !std::isfinite(v[i])) {
      throw Error(ErrorKind::parameter_domain, "cycle parameter " + theta_names()[i] + " must be finite and > 0");
    }
  }
}

CycleTheta apply_shared_tau(CycleTheta theta) {
  const double common = 0.5 * (theta.tau_s1 + theta.tau_s2);
  theta.tau_s1 = common;
  theta.tau_s2 = common;
  return theta;
}

std::string to_string(RRMode mode) {
  switch (mode) {
    case RRMode::constant: return "constant";
    case RRMode::explicit_series: return "explicit";
    case RRMode::weak_hrv: return "weak_hrv";
  }
  return "constant";
}

RRMode parse_rr_mode(const std::string& text) {
  if (text == "constant") return RRMode::constant;
  if (text == "explicit") return RRMode::explicit_series;
  if (text == "weak_hrv") return RRMode::weak_hrv;
  throw Error(ErrorKind::config, "unknown rr_mode '" + text + "' (expected constant, explicit or weak_hrv)");
}

void validate(const HRVConfig& cfg, RRMode mode) {
  if (!(cfg.rr_min > 0.0) || !(cfg.rr_min < cfg.rr_max)) {
    throw Error(ErrorKind::config, "RR plausibility band must satisfy 0 < rr_min < rr_max");
  }
  auto in_band = [&](double v) { return v >= cfg.rr_min && v <= cfg.rr_max; };
  if (mode == RRMode::explicit_series) {
    if (cfg.explicit_rr.empty()) throw Error(ErrorKind::config, "explicit RR mode needs a non-empty RR list");
    for (std::size_t i = 0; i < cfg.explicit_rr.size(); ++i) {
      if (!in_band(cfg.explicit_rr[i])) {
        std::ostringstream os;
        os << "explicit RR[" << i << "]=" << cfg.explicit_rr[i] << " s outside plausibility band [" << cfg.rr_min
           << ", " << cfg.rr_max << "]";
        throw Error(ErrorKind::config, os.str());
      }
    }
    return;
  }
  if (!in_band(cfg.mean_rr)) {
    std::ostringstream os;
    os << "mean RR " << cfg.mean_rr << " s outside plausibility band [" << cfg.rr_min << ", " << cfg.rr_max << "]";
    throw Error(ErrorKind::config, os.str());
  }
  if (mode == RRMode::weak_hrv) {
    if (!(cfg.alpha >= 0.0)) throw Error(ErrorKind::config, "HRV alpha must be >= 0");
    if (!(cfg.jitter_std >= 0.0)) throw Error(ErrorKind::config, "HRV jitter_std must be >= 0");
    if (cfg.drift_window < 1) throw Error(ErrorKind::config, "HRV drift window must be >= 1");
  }
}

RRSeries make_rr_series(RRMode mode, const HRVConfig& cfg, std::size_t n_cycles, std::uint64_t seed) {
  if (n_cycles == 0) throw Error(ErrorKind::parameter_domain, "make_rr_series: n_cycles must be >= 1");
  validate(cfg, mode);
  RRSeries out;
  out.mode = mode;
  out.rr.resize(n_cycles);
  switch (mode) {
    case RRMode::constant:
      std::fill(out.rr.begin(), out.rr.end(), cfg.mean_rr);
      break;
    case RRMode::explicit_series:
      for (std::size_t k = 0; k < n_cycles; ++k) out.rr[k] = cfg.explicit_rr[k % cfg.explicit_rr.size()];
      break;
    case RRMode::weak_hrv: {
      const auto w = static_cast<std::size_t>(cfg.drift_window);
      Rng drift_rng(derive_seed(seed, "drift"));
      Rng jitter_rng(derive_seed(seed, "jitter"));
      std::normal_distribution<double> normal(0.0, 1.0);
      std::vector<double> z(n_cycles + w - 1);
      for (double& v : z) v = normal(drift_rng);
      // running window sum; sum / sqrt(w) has unit variance
      double window_sum = std::accumulate(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(w), 0.0);
      const double scale = 1.0 / std::sqrt(static_cast<double>(w));
      for (std::size_t k = 0; k < n_cycles; ++k) {
        if (k > 0) window_sum += z[k + w - 1] - z[k - 1];
        const double drift = window_sum * scale;
        const double jitter = cfg.jitter_std * normal(jitter_rng);
        out.rr[k] = std::clamp(cfg.mean_rr + cfg.alpha * drift + jitter, cfg.rr_min, cfg.rr_max);
      }
      break;
    }
  }
  return out;
}

std::vector<double> onset_times(const RRSeries& rr) {
  std::vector<double> t(rr.rr.size(), 0.0);
  for (std::size_t k = 1; k < t.size(); ++k) t[k] = t[k - 1] + rr.rr[k - 1];
  return t;
}

std::vector<std::size_t> cycle_onset_samples(const RRSeries& rr, double fs) {
  std::vector<std::size_t> idx(rr.rr.size(), 0);
  for (std::size_t k = 1; k < idx.size(); ++k) {
    idx[k] = idx[k - 1] + static_cast<std::size_t>(std::lround(rr.rr[k - 1] * fs));
  }
  return idx;
}

namespace {

void add_event(std::vector<double>& buf, std::size_t offset, const EventParams& p, double fs) {
  if (p.amplitude == 0.0 || offset >= buf.size()) return;
  const Signal ev = render_event(p, fs);
  const std::size_t n = std::min(ev.size(), buf.size() - offset);
  for (std::size_t i = 0; i < n; ++i) buf[offset + i] += ev[i];
}

void check_renderable(const CycleTheta& theta) {
  if (!(theta.a_s1 >= 0.0) || !(theta.a_s2 >= 0.0) || !(theta.tau_s1 > 0.0) || !(theta.tau_s2 > 0.0) ||
      !(theta.delta_t > 0.0)) {
    throw Error(ErrorKind::parameter_domain, "render_cycle: amplitudes must be >= 0, tau and deltaT > 0");
  }
}

}  // namespace

Signal render_cycle(const CycleTheta& theta, const EventPair& events, double fs, std::size_t n_samples) {
  check_renderable(theta);
  Signal out(n_samples, fs);
  add_event(out.samples, 0, {theta.a_s1, events.f0_s1, events.attack, theta.tau_s1}, fs);
  const auto s2_offset = static_cast<std::size_t>(std::lround(theta.delta_t * fs));
  add_event(out.samples, s2_offset, {theta.a_s2, events.f0_s2, events.attack, theta.tau_s2}, fs);
  return out;
}

Signal render_fetal_train(std::span<const CycleTheta> thetas, const RRSeries& rr, const FetalTrainOptions& opt,
                          double fs) {
  if (thetas.size() != rr.rr.size()) {
    throw Error(ErrorKind::parameter_domain, "render_fetal_train: one theta per RR interval required");
  }
  if (thetas.empty()) throw Error(ErrorKind::parameter_domain, "render_fetal_train: no cycles");
  const double nominal_rr = std::accumulate(rr.rr.begin(), rr.rr.end(), 0.0) / static_cast<double>(rr.rr.size());
  const auto nominal_len = static_cast<std::size_t>(std::lround(nominal_rr * fs));

  std::vector<double> out;
  std::size_t total = 0;
  for (double v : rr.rr) total += static_cast<std::size_t>(std::lround(v * fs));
  out.reserve(total);

  for (std::size_t k = 0; k < thetas.size(); ++k) {
    const CycleTheta theta = opt.shared_tau ? apply_shared_tau(thetas[k]) : thetas[k];
    const auto s2_offset = std::lround(theta.delta_t * fs);
    if (theta.delta_t >= rr.rr[k] || s2_offset >= static_cast<long>(nominal_len)) {
      std::ostringstream os;
      os << "cycle " << k << ": deltaT=" << theta.delta_t << " s does not fit inside RR=" << rr.rr[k]
         << " s (nominal cycle " << nominal_rr << " s)";
      throw Error(ErrorKind::cycle_geometry, os.str());
    }
    const Signal cycle = render_cycle(theta, opt.events, fs, nominal_len);
    const auto target = static_cast<std::size_t>(std::lround(rr.rr[k] * fs));
    const auto stretched = resample_to_length(cycle.samples, target);
    out.insert(out.end(), stretched.begin(), stretched.end());
  }
  return Signal(std::move(out), fs);
}

void validate(const MaternalConfig& cfg) {
  if (!(cfg.mhr > 30.0 && cfg.mhr < 200.0)) throw Error(ErrorKind::config, "mhr must lie in (30, 200) bpm");
  if (!(cfg.global_scale >= 0.0)) throw Error(ErrorKind::config, "maternal global scale must be >= 0");
  if (!(cfg.a_s1 >= 0.0) || !(cfg.a_s2 >= 0.0) || !(cfg.tau > 0.0) || !(cfg.delta_t > 0.0)) {
    throw Error(ErrorKind::config, "maternal event hyperparameters out of domain");
  }
  if (cfg.delta_t >= 60.0 / cfg.mhr) throw Error(ErrorKind::config, "maternal deltaT must be shorter than the beat period");
}

std::vector<double> maternal_onsets(const MaternalConfig& cfg, double duration) {
  validate(cfg);
  const double period = 60.0 / cfg.mhr;
  std::vector<double> t;
  for (std::size_t l = 0;; ++l) {
    const double onset = static_cast<double>(l) * period;
    if (onset >= duration) break;
    t.push_back(onset);
  }
  return t;
}

Signal render_maternal_train(const MaternalConfig& cfg, double duration, double fs) {
  if (!(duration > 0.0)) throw Error(ErrorKind::parameter_domain, "render_maternal_train: duration must be > 0");
  validate(cfg);
  Signal out(static_cast<std::size_t>(std::lround(duration * fs)), fs);
  if (cfg.global_scale == 0.0) return out;
  const CycleTheta theta{cfg.a_s1 * cfg.global_scale, cfg.a_s2 * cfg.global_scale, cfg.tau, cfg.tau, cfg.delta_t};
  const auto period_len = static_cast<std::size_t>(std::lround(60.0 / cfg.mhr * fs));
  const Signal beat = render_cycle(theta, cfg.events, fs, period_len);
  for (double onset : maternal_onsets(cfg, duration)) {
    const auto start = static_cast<std::size_t>(std::lround(onset * fs));
    for (std::size_t i = 0; i < beat.size() && start + i < out.size(); ++i) out[start + i] += beat[i];
  }
  return out;
}

}  // namespace fpcg
