#include "fpcg/simulate.hpp"

#include <cmath>

#include "fpcg/error.hpp"
#include "fpcg/seed.hpp"

namespace fpcg {

namespace {

template <typename F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw e.with_stage(name);
  }
}

}  // namespace

std::uint64_t batch_seed(std::uint64_t seed, std::size_t index) { return derive_seed(seed, "sample", index); }

Recording simulate(const SimConfig& cfg, std::uint64_t seed) {
  stage("config", [&] {
    validate(cfg);
    return 0;
  });
  Recording rec;
  rec.config = cfg;
  rec.seed = seed;
  const double fs = cfg.fs;
  const auto n_cycles = static_cast<std::size_t>(cfg.cycles_per_sample);
  auto& truth = rec.truth;

  truth.thetas = stage("sampler", [&] {
    auto thetas = sample_thetas(cfg.prior, cfg.box, n_cycles, derive_seed(seed, "theta"));
    if (cfg.stabilize_delta_t) {
      const auto dts = bootstrap_delta_t(cfg.delta_t_measured, n_cycles, derive_seed(seed, "delta_t"));
      for (std::size_t k = 0; k < n_cycles; ++k) thetas[k].delta_t = dts[k];
    }
    if (cfg.shared_tau) {
      for (auto& t : thetas) t = apply_shared_tau(t);
    }
    return thetas;
  });

  stage("heart-source", [&] {
    HRVConfig hrv = cfg.hrv;
    hrv.mean_rr = 60.0 / cfg.fhr;
    truth.rr = make_rr_series(cfg.rr_mode, hrv, n_cycles, derive_seed(seed, "rr"));
    truth.onset_times = onset_times(truth.rr);
    truth.onset_samples = cycle_onset_samples(truth.rr, fs);
    rec.fetal_clean = render_fetal_train(truth.thetas, truth.rr, FetalTrainOptions{cfg.fetal_events, false}, fs);
    double mean_rr = 0.0;
    for (double r : truth.rr.rr) mean_rr += r;
    mean_rr /= static_cast<double>(n_cycles);
    const double nominal = static_cast<double>(std::lround(mean_rr * fs));
    for (std::size_t k = 0; k < n_cycles; ++k) {
      const double len = static_cast<double>(std::lround(truth.rr.rr[k] * fs));
      const double s2 = static_cast<double>(std::lround(truth.thetas[k].delta_t * fs)) * len / nominal;
      truth.s2_times.push_back((static_cast<double>(truth.onset_samples[k]) + s2) / fs);
    }
    const double duration = static_cast<double>(rec.fetal_clean.size()) / fs;
    truth.maternal_onsets = maternal_onsets(cfg.maternal, duration);
    rec.maternal_clean = render_maternal_train(cfg.maternal, duration, fs);
    rec.maternal_clean.samples.resize(rec.fetal_clean.size(), 0.0);
    return 0;
  });
  const std::size_t n = rec.fetal_clean.size();
  const double duration = static_cast<double>(n) / fs;

  rec.cardiac_propagated = stage("transmission", [&] {
    const Signal h = cascade_response(cfg.transmission, fs);
    return propagate(add(rec.fetal_clean, rec.maternal_clean), h);
  });

  // Artifact tracks at unit reference level; scaled by sigma_n below.
  Signal movement_unit(n, fs), uc_noise_unit(n, fs);
  rec.uc_envelope = Signal(n, fs);
  stage("artifacts", [&] {
    if (cfg.movement.enabled) {
      auto track = movement_artifacts(cfg.movement, duration, fs, derive_seed(seed, "movement"));
      movement_unit = std::move(track.signal);
      truth.movement_events = std::move(track.events);
    }
    if (cfg.uterine.enabled) {
      auto track = uterine_contraction_track(cfg.uterine, duration, fs, derive_seed(seed, "uc"));
      rec.uc_envelope = std::move(track.attenuation);
      uc_noise_unit = std::move(track.noise);
      truth.contractions = std::move(track.events);
    }
    movement_unit.samples.resize(n, 0.0);
    uc_noise_unit.samples.resize(n, 0.0);
    rec.uc_envelope.samples.resize(n, 0.0);
    return 0;
  });

  Signal cardiac(n, fs);
  for (std::size_t i = 0; i < n; ++i) cardiac[i] = rec.cardiac_propagated[i] * (1.0 - rec.uc_envelope[i]);

  stage("noise", [&] {
    if (std::isinf(cfg.noise.snr_db)) {
      rec.sigma_n = 0.0;
      rec.noise = Signal(n, fs);
      return 0;
    }
    const Signal base = ar1_noise(cfg.noise.rho, n, fs, derive_seed(seed, "noise"));
    Signal shaped = gain_modulate(base, cfg.noise.gamma, cfg.noise.lp_cutoff, derive_seed(seed, "gain"));
    const double r = rms(shaped.samples);
    if (r > 0.0) {
      for (double& v : shaped.samples) v /= r;
    }
    auto mix = mix_with_snr(cardiac, shaped, cfg.noise.snr_db);
    rec.sigma_n = mix.sigma_n;
    rec.noise = std::move(mix.scaled_noise);
    return 0;
  });

  rec.movement = Signal(n, fs);
  rec.uc_noise = Signal(n, fs);
  rec.mixture = Signal(n, fs);
  for (std::size_t i = 0; i < n; ++i) {
    rec.movement[i] = rec.sigma_n * movement_unit[i];
    rec.uc_noise[i] = rec.sigma_n * uc_noise_unit[i];
    rec.mixture[i] = cardiac[i] + rec.noise[i] + rec.movement[i] + rec.uc_noise[i];
  }
  return rec;
}

}  // namespace fpcg
