#pragma once

#include <cstddef>
#include <vector>

#include "fpcg/noise.hpp"
#include "fpcg/signal.hpp"

namespace fpcg {

/// Preprocessing and evaluation constants. Real and simulated recordings go
/// through the same `analyze` call, so these live in exactly one place.
struct PreprocConfig {
  Interval band{20.0, 150.0};  // Hz, Butterworth band-pass, zero-phase
  int band_order = 4;
  double env_lp = 8.0;         // Hz, envelope smoothing
  int env_lp_order = 4;
  double onset_lp = 30.0;      // Hz, lighter smoothing used for onset refinement
  Interval fhr_search{80.0, 200.0};    // bpm
  Interval rr_plausible{0.25, 0.90};   // s
  double min_peak_distance = 0.7;      // fraction of T0
  double onset_threshold = 0.2;        // fraction of the local peak height
  double min_peak_height = 0.15;       // fraction of the median selected peak
  double acf_min_peak = 0.1;           // below this no periodicity is reported
  double welch_segment = 2.0;          // s
  double welch_overlap = 0.5;
  double band_clamp = 0.45;            // upper band edge limited to this * fs
};

/// Band edges actually used at `fs`. The upper edge is clamped to
/// band_clamp * fs with a warning; throws ErrorKind::band_infeasible when it
/// reaches Nyquist.
Interval effective_band(const PreprocConfig& cfg, double fs);

/// Zero-phase band-pass of x.
Signal bandpass(const Signal& x, const PreprocConfig& cfg);

/// band-pass -> |analytic signal| -> 8 Hz zero-phase low-pass -> divide by
/// max. Values clamped to >= 0. An all-zero input gives an all-zero envelope.
Signal preprocess_envelope(const Signal& x, const PreprocConfig& cfg);

struct Envelopes {
  Signal bandpassed;
  Signal envelope;        // analysis envelope (env_lp)
  Signal onset_envelope;  // onset-refinement envelope (onset_lp), max-normalized
};

Envelopes compute_envelopes(const Signal& x, const PreprocConfig& cfg);

/// Dominant period from the biased, normalized ACF of the mean-removed
/// envelope, searched over lags [60/fhr_max, 60/fhr_min] s with parabolic
/// refinement. Throws ErrorKind::no_periodicity when the best ACF value is
/// below acf_min_peak.
double estimate_period(const Signal& env, const PreprocConfig& cfg);

struct CycleSet {
  double fs = 0.0;
  double t0 = 0.0;
  std::vector<std::size_t> peaks;   // selected envelope peaks
  std::vector<std::size_t> onsets;  // refined onset per peak, strictly increasing
  std::vector<std::size_t> starts;  // retained cycles: [starts[i], ends[i])
  std::vector<std::size_t> ends;
  std::vector<std::vector<double>> cycles;  // envelope per retained cycle, zero-mean, max-abs 1

  std::size_t size() const { return cycles.size(); }
};

/// Peaks at least min_peak_distance * T0 apart (taller peaks win), onset of
/// each found by walking back from the local maximum of `onset_env` to the
/// last sample below onset_threshold of its height. Cycles span consecutive
/// onsets; those with RR outside rr_plausible are dropped. Throws
/// ErrorKind::segmentation when fewer than 2 cycles survive.
CycleSet segment_cycles(const Signal& env, const Signal& onset_env, double t0, const PreprocConfig& cfg);

/// Same, refining onsets on `env` itself.
CycleSet segment_cycles(const Signal& env, double t0, const PreprocConfig& cfg);

/// Slices of `x` over the retained cycles, mean removed and scaled to max-abs 1.
std::vector<Signal> extract_cycles(const Signal& x, const CycleSet& cycles);

struct Curve {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> spread;  // optional +/- band (same length as y or empty)
};

/// Biased ACF of each cycle normalized to 1 at lag 0, truncated to the
/// shortest cycle and averaged. x is lag in seconds.
Curve cycle_averaged_acf(const CycleSet& cycles);

struct WelchOptions {
  std::size_t segment = 0;  // samples
  double overlap = 0.5;     // fraction of segment
};

struct WelchEstimate {
  std::vector<double> freq;
  std::vector<double> psd;       // mean one-sided density
  std::vector<double> db_std;    // std across segments of 10 log10(segment PSD)
  std::size_t segments = 0;
};

/// Welch density estimate: periodic Hann window, per-segment mean removal,
/// one-sided scaling (sum(psd) * df ~ mean power).
WelchEstimate welch_psd(const Signal& x, const WelchOptions& opt);

/// Band-pass, RMS normalization, Welch, 10 log10. spread = db_std.
Curve welch_psd_db(const Signal& x, const PreprocConfig& cfg);
Curve welch_psd_db(const Signal& x, const PreprocConfig& cfg, const WelchOptions& opt);

struct Analysis {
  Envelopes envelopes;
  double t0 = 0.0;
  CycleSet cycles;
  Curve acf;
  Curve psd;
};

/// The whole chain; the single entry point for real and simulated input.
Analysis analyze(const Signal& x, const PreprocConfig& cfg);

struct CompareReport {
  double acf_rmse = 0.0;
  double psd_rmse_db = 0.0;
  double envelope_corr = 0.0;
  Analysis real;
  Analysis sim;
};

/// Runs analyze on both inputs (errors re-attributed to stage "real" or
/// "sim"), then ACF RMSE over common lags, PSD RMSE (dB) over the band and
/// the best Pearson correlation of the envelopes over shifts within +/- T0/2.
CompareReport compare_stats(const Signal& real, const Signal& sim, const PreprocConfig& cfg);

}  // namespace fpcg
