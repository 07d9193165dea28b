#include "fpcg/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "fpcg/error.hpp"
#include "fpcg/fft.hpp"
#include "fpcg/filter.hpp"
#include "fpcg/log.hpp"
#include "fpcg/resample.hpp"

namespace fpcg {

namespace {

void require_length(const Sos& sos, std::size_t n, const char* what) {
  if (n <= filtfilt_padlen(sos)) {
    std::ostringstream os;
    os << what << ": signal of " << n << " samples is too short for zero-phase filtering";
    throw Error(ErrorKind::insufficient_data, os.str());
  }
}

void normalize_max(std::vector<double>& v) {
  for (double& x : v) x = std::max(x, 0.0);
  const double m = v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
  if (m > 0.0) {
    for (double& x : v) x /= m;
  }
}

std::vector<double> smooth_envelope(const std::vector<double>& bp, double cutoff, int order, double fs) {
  const Sos lp = butterworth_lowpass(order, cutoff, fs);
  require_length(lp, bp.size(), "envelope");
  auto env = sosfiltfilt(lp, hilbert_envelope(bp));
  normalize_max(env);
  return env;
}

// Biased ACF normalized by lag-0 energy, lags 0..max_lag.
std::vector<double> biased_acf(std::span<const double> x, std::size_t max_lag) {
  const std::size_t n = x.size();
  max_lag = std::min(max_lag, n == 0 ? 0 : n - 1);
  std::vector<double> r(max_lag + 1, 0.0);
  if (n == 0) return r;
  if (n * (max_lag + 1) < 2'000'000) {
    for (std::size_t l = 0; l <= max_lag; ++l) {
      double s = 0.0;
      for (std::size_t i = 0; i + l < n; ++i) s += x[i] * x[i + l];
      r[l] = s;
    }
  } else {
    const std::size_t nfft = next_fast_size(2 * n);
    auto spec = rfft(x, nfft);
    for (auto& c : spec) c = std::norm(c);
    const auto full = irfft(spec, nfft);
    for (std::size_t l = 0; l <= max_lag; ++l) r[l] = full[l];
  }
  const double r0 = r[0];
  if (r0 > 0.0) {
    for (double& v : r) v /= r0;
  }
  return r;
}

double hann_periodic(std::size_t i, std::size_t n) {
  return 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
}

double pearson(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = std::min(a.size(), b.size());
  if (n < 2) return 0.0;
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

double rmse(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = std::min(a.size(), b.size());
  if (n == 0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s / static_cast<double>(n));
}

}  // namespace

Interval effective_band(const PreprocConfig& cfg, double fs) {
  if (!(fs > 0.0)) throw Error(ErrorKind::parameter_domain, "sample rate must be positive");
  if (!(cfg.band.first > 0.0) || !(cfg.band.first < cfg.band.second)) {
    throw Error(ErrorKind::config, "band-pass edges must satisfy 0 < low < high");
  }
  const double nyq = 0.5 * fs;
  if (cfg.band.second >= nyq) {
    std::ostringstream os;
    os << "upper band edge " << cfg.band.second << " Hz is at or above Nyquist (" << nyq << " Hz)";
    throw Error(ErrorKind::band_infeasible, os.str());
  }
  Interval band = cfg.band;
  const double limit = cfg.band_clamp * fs;
  if (band.second > limit) {
    std::ostringstream os;
    os << "upper band edge " << band.second << " Hz clamped to " << limit << " Hz at fs = " << fs;
    warn(os.str());
    band.second = limit;
    if (band.first >= band.second) throw Error(ErrorKind::band_infeasible, "band collapses after clamping");
  }
  return band;
}

Signal bandpass(const Signal& x, const PreprocConfig& cfg) {
  validate(x);
  const Interval band = effective_band(cfg, x.fs);
  const Sos sos = butterworth_bandpass(cfg.band_order, band.first, band.second, x.fs);
  require_length(sos, x.size(), "band-pass");
  return Signal(sosfiltfilt(sos, x.view()), x.fs);
}

Envelopes compute_envelopes(const Signal& x, const PreprocConfig& cfg) {
  Envelopes out;
  out.bandpassed = bandpass(x, cfg);
  const auto& bp = out.bandpassed.samples;
  out.envelope = Signal(smooth_envelope(bp, cfg.env_lp, cfg.env_lp_order, x.fs), x.fs);
  out.onset_envelope = Signal(smooth_envelope(bp, cfg.onset_lp, cfg.env_lp_order, x.fs), x.fs);
  return out;
}

Signal preprocess_envelope(const Signal& x, const PreprocConfig& cfg) {
  const Signal bp = bandpass(x, cfg);
  return Signal(smooth_envelope(bp.samples, cfg.env_lp, cfg.env_lp_order, x.fs), x.fs);
}

double estimate_period(const Signal& env, const PreprocConfig& cfg) {
  validate(env);
  const double fs = env.fs;
  const double lag_min_s = 60.0 / cfg.fhr_search.second;
  const double lag_max_s = 60.0 / cfg.fhr_search.first;
  const auto lo = static_cast<std::size_t>(std::ceil(lag_min_s * fs));
  const auto hi = static_cast<std::size_t>(std::floor(lag_max_s * fs));
  if (lo < 1 || hi <= lo) throw Error(ErrorKind::parameter_domain, "empty period search range");
  if (env.size() < 2 * hi) {
    throw Error(ErrorKind::insufficient_data, "envelope too short for period estimation");
  }
  std::vector<double> x = env.samples;
  const double m = mean(x);
  for (double& v : x) v -= m;
  const auto r = biased_acf(x, hi + 1);
  if (r[0] == 0.0 && std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; })) {
    throw Error(ErrorKind::no_periodicity, "envelope is constant");
  }
  std::size_t best = lo;
  for (std::size_t l = lo; l <= hi; ++l) {
    if (r[l] > r[best]) best = l;
  }
  if (!(r[best] >= cfg.acf_min_peak)) {
    std::ostringstream os;
    os << "no periodicity: envelope ACF maximum " << r[best] << " below " << cfg.acf_min_peak;
    throw Error(ErrorKind::no_periodicity, os.str());
  }
  double lag = static_cast<double>(best);
  if (best > lo && best < hi) {
    const double y0 = r[best - 1], y1 = r[best], y2 = r[best + 1];
    const double den = y0 - 2.0 * y1 + y2;
    if (den < 0.0) lag += std::clamp(0.5 * (y0 - y2) / den, -0.5, 0.5);
  }
  return lag / fs;
}

CycleSet segment_cycles(const Signal& env, const Signal& onset_env, double t0, const PreprocConfig& cfg) {
  validate(env);
  if (onset_env.size() != env.size()) throw Error(ErrorKind::parameter_domain, "envelope length mismatch");
  if (!(t0 > 0.0)) throw Error(ErrorKind::parameter_domain, "T0 must be positive");
  const double fs = env.fs;
  const auto& e = env.samples;
  const std::size_t n = e.size();

  CycleSet out;
  out.fs = fs;
  out.t0 = t0;

  // Local maxima, then greedy selection by height with a minimum spacing.
  std::vector<std::size_t> cand;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (e[i] > e[i - 1] && e[i] >= e[i + 1]) cand.push_back(i);
  }
  std::sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) { return e[a] > e[b]; });
  const double min_dist = cfg.min_peak_distance * t0 * fs;
  std::vector<std::size_t> picked;
  for (std::size_t c : cand) {
    const bool clear = std::all_of(picked.begin(), picked.end(), [&](std::size_t p) {
      return std::abs(static_cast<double>(c) - static_cast<double>(p)) >= min_dist;
    });
    if (clear) picked.push_back(c);
  }
  if (!picked.empty()) {
    std::vector<double> h;
    for (std::size_t p : picked) h.push_back(e[p]);
    std::nth_element(h.begin(), h.begin() + static_cast<long>(h.size() / 2), h.end());
    const double floor = cfg.min_peak_height * h[h.size() / 2];
    std::erase_if(picked, [&](std::size_t p) { return e[p] < floor; });
  }
  std::sort(picked.begin(), picked.end());
  out.peaks = picked;

  // Onset: local maximum of the onset envelope near the peak, walk back to the
  // last sample below threshold.
  const auto& r = onset_env.samples;
  const auto search = static_cast<std::size_t>(std::lround(0.15 * t0 * fs));
  const auto back_limit = static_cast<std::size_t>(std::lround(0.5 * t0 * fs));
  std::size_t prev = 0;
  bool have_prev = false;
  for (std::size_t p : picked) {
    const std::size_t a = p > search ? p - search : 0;
    const std::size_t b = std::min(n - 1, p + search);
    std::size_t m = a;
    for (std::size_t i = a; i <= b; ++i) {
      if (r[i] > r[m]) m = i;
    }
    std::size_t lim = m > back_limit ? m - back_limit : 0;
    if (have_prev) lim = std::max(lim, prev + 1);
    if (lim > m) continue;
    // Height above the local floor before the peak.
    std::vector<double> floor_win(r.begin() + static_cast<long>(lim), r.begin() + static_cast<long>(m) + 1);
    std::nth_element(floor_win.begin(), floor_win.begin() + static_cast<long>(floor_win.size() / 2), floor_win.end());
    const double base = floor_win[floor_win.size() / 2];
    const double thr = base + cfg.onset_threshold * (r[m] - base);
    std::size_t i = m;
    while (i > lim && r[i] >= thr) --i;
    if (have_prev && i <= prev) continue;
    out.onsets.push_back(i);
    prev = i;
    have_prev = true;
  }

  for (std::size_t k = 0; k + 1 < out.onsets.size(); ++k) {
    const std::size_t s = out.onsets[k], t = out.onsets[k + 1];
    const double rr = static_cast<double>(t - s) / fs;
    if (rr <= cfg.rr_plausible.first || rr >= cfg.rr_plausible.second) continue;
    std::vector<double> c(e.begin() + static_cast<long>(s), e.begin() + static_cast<long>(t));
    const double mu = mean(c);
    for (double& v : c) v -= mu;
    const double peak = max_abs(c);
    if (peak > 0.0) {
      for (double& v : c) v /= peak;
    }
    out.starts.push_back(s);
    out.ends.push_back(t);
    out.cycles.push_back(std::move(c));
  }
  if (out.cycles.size() < 2) {
    std::ostringstream os;
    os << "segmentation kept " << out.cycles.size() << " plausible cycles (need at least 2)";
    throw Error(ErrorKind::segmentation, os.str());
  }
  return out;
}

CycleSet segment_cycles(const Signal& env, double t0, const PreprocConfig& cfg) {
  return segment_cycles(env, env, t0, cfg);
}

std::vector<Signal> extract_cycles(const Signal& x, const CycleSet& cycles) {
  std::vector<Signal> out;
  for (std::size_t k = 0; k < cycles.size(); ++k) {
    const std::size_t s = cycles.starts[k], t = std::min(cycles.ends[k], x.size());
    if (t <= s) continue;
    std::vector<double> c(x.samples.begin() + static_cast<long>(s), x.samples.begin() + static_cast<long>(t));
    const double mu = mean(c);
    for (double& v : c) v -= mu;
    const double peak = max_abs(c);
    if (peak > 0.0) {
      for (double& v : c) v /= peak;
    }
    out.emplace_back(std::move(c), x.fs);
  }
  return out;
}

Curve cycle_averaged_acf(const CycleSet& cycles) {
  if (cycles.cycles.empty()) throw Error(ErrorKind::insufficient_data, "no cycles for ACF");
  std::size_t len = cycles.cycles.front().size();
  for (const auto& c : cycles.cycles) len = std::min(len, c.size());
  if (len == 0) throw Error(ErrorKind::insufficient_data, "empty cycle");
  Curve out;
  out.y.assign(len, 0.0);
  std::size_t used = 0;
  for (const auto& c : cycles.cycles) {
    const auto r = biased_acf(c, len - 1);
    if (r.size() < len || r[0] == 0.0) continue;
    for (std::size_t l = 0; l < len; ++l) out.y[l] += r[l];
    ++used;
  }
  if (used == 0) throw Error(ErrorKind::degenerate, "all cycles are flat");
  for (double& v : out.y) v /= static_cast<double>(used);
  out.x.resize(len);
  for (std::size_t l = 0; l < len; ++l) out.x[l] = static_cast<double>(l) / cycles.fs;
  return out;
}

WelchEstimate welch_psd(const Signal& x, const WelchOptions& opt) {
  validate(x);
  const std::size_t seg = opt.segment;
  if (seg < 2) throw Error(ErrorKind::parameter_domain, "Welch segment must have at least 2 samples");
  if (!(opt.overlap >= 0.0 && opt.overlap < 1.0)) throw Error(ErrorKind::parameter_domain, "Welch overlap must be in [0, 1)");
  if (x.size() < seg) {
    std::ostringstream os;
    os << "signal of " << x.size() << " samples shorter than one Welch segment (" << seg << ")";
    throw Error(ErrorKind::insufficient_data, os.str());
  }
  const std::size_t hop = std::max<std::size_t>(1, seg - static_cast<std::size_t>(std::lround(opt.overlap * static_cast<double>(seg))));
  std::vector<double> w(seg);
  double wss = 0.0;
  for (std::size_t i = 0; i < seg; ++i) {
    w[i] = hann_periodic(i, seg);
    wss += w[i] * w[i];
  }
  const std::size_t nbins = seg / 2 + 1;
  WelchEstimate out;
  out.freq.resize(nbins);
  for (std::size_t k = 0; k < nbins; ++k) out.freq[k] = static_cast<double>(k) * x.fs / static_cast<double>(seg);
  out.psd.assign(nbins, 0.0);
  std::vector<double> db_sum(nbins, 0.0), db_sq(nbins, 0.0);
  std::vector<double> buf(seg);
  const double scale = 1.0 / (x.fs * wss);
  for (std::size_t start = 0; start + seg <= x.size(); start += hop) {
    const double mu = mean(std::span<const double>(x.samples).subspan(start, seg));
    for (std::size_t i = 0; i < seg; ++i) buf[i] = (x.samples[start + i] - mu) * w[i];
    const auto spec = rfft(buf);
    for (std::size_t k = 0; k < nbins; ++k) {
      double p = std::norm(spec[k]) * scale;
      const bool edge = k == 0 || (seg % 2 == 0 && k == nbins - 1);
      if (!edge) p *= 2.0;
      out.psd[k] += p;
      const double db = 10.0 * std::log10(std::max(p, 1e-300));
      db_sum[k] += db;
      db_sq[k] += db * db;
    }
    ++out.segments;
  }
  const auto m = static_cast<double>(out.segments);
  out.db_std.resize(nbins);
  for (std::size_t k = 0; k < nbins; ++k) {
    out.psd[k] /= m;
    const double mu = db_sum[k] / m;
    out.db_std[k] = std::sqrt(std::max(0.0, db_sq[k] / m - mu * mu));
  }
  return out;
}

Curve welch_psd_db(const Signal& x, const PreprocConfig& cfg, const WelchOptions& opt) {
  Signal bp = bandpass(x, cfg);
  const double r = rms(bp.samples);
  if (r > 0.0) {
    for (double& v : bp.samples) v /= r;
  }
  const auto est = welch_psd(bp, opt);
  Curve out;
  out.x = est.freq;
  out.y.resize(est.psd.size());
  for (std::size_t k = 0; k < est.psd.size(); ++k) out.y[k] = 10.0 * std::log10(std::max(est.psd[k], 1e-300));
  out.spread = est.db_std;
  return out;
}

Curve welch_psd_db(const Signal& x, const PreprocConfig& cfg) {
  WelchOptions opt;
  opt.segment = static_cast<std::size_t>(std::lround(cfg.welch_segment * x.fs));
  opt.overlap = cfg.welch_overlap;
  return welch_psd_db(x, cfg, opt);
}

Analysis analyze(const Signal& x, const PreprocConfig& cfg) {
  Analysis a;
  a.envelopes = compute_envelopes(x, cfg);
  a.t0 = estimate_period(a.envelopes.envelope, cfg);
  a.cycles = segment_cycles(a.envelopes.envelope, a.envelopes.onset_envelope, a.t0, cfg);
  a.acf = cycle_averaged_acf(a.cycles);
  a.psd = welch_psd_db(x, cfg);
  return a;
}

CompareReport compare_stats(const Signal& real, const Signal& sim, const PreprocConfig& cfg) {
  CompareReport rep;
  try {
    rep.real = analyze(real, cfg);
  } catch (const Error& e) {
    throw e.with_stage("real");
  }
  try {
    rep.sim = analyze(sim, cfg);
  } catch (const Error& e) {
    throw e.with_stage("sim");
  }

  // ACF curves on the real lag grid.
  {
    const auto& ra = rep.real.acf;
    const auto& sa = rep.sim.acf;
    std::vector<double> a, b;
    const double max_lag = std::min(ra.x.back(), sa.x.back());
    for (std::size_t i = 0; i < ra.x.size() && ra.x[i] <= max_lag; ++i) {
      const double pos = ra.x[i] * sim.fs;  // lag in sim samples
      const auto j = static_cast<std::size_t>(std::floor(pos));
      double v = sa.y[std::min(j, sa.y.size() - 1)];
      if (j + 1 < sa.y.size()) v += (pos - static_cast<double>(j)) * (sa.y[j + 1] - sa.y[j]);
      a.push_back(ra.y[i]);
      b.push_back(v);
    }
    rep.acf_rmse = rmse(a, b);
  }

  // PSD over the common band; interpolate when the frequency grids differ.
  {
    const Interval br = effective_band(cfg, real.fs);
    const Interval bs = effective_band(cfg, sim.fs);
    const double lo = std::max(br.first, bs.first), hi = std::min(br.second, bs.second);
    const auto& rp = rep.real.psd;
    const auto& sp = rep.sim.psd;
    const double dfs = sp.x.size() > 1 ? sp.x[1] - sp.x[0] : 1.0;
    std::vector<double> a, b;
    for (std::size_t i = 0; i < rp.x.size(); ++i) {
      const double f = rp.x[i];
      if (f < lo || f > hi) continue;
      const double pos = f / dfs;
      const auto j = static_cast<std::size_t>(std::floor(pos));
      if (j + 1 >= sp.y.size()) break;
      b.push_back(sp.y[j] + (pos - static_cast<double>(j)) * (sp.y[j + 1] - sp.y[j]));
      a.push_back(rp.y[i]);
    }
    if (a.empty()) throw Error(ErrorKind::band_infeasible, "no PSD bins inside the comparison band");
    rep.psd_rmse_db = rmse(a, b);
  }

  // Envelope correlation, best over shifts within +/- T0/2.
  {
    const auto& er = rep.real.envelopes.envelope;
    Signal es = rep.sim.envelopes.envelope;
    if (es.fs != er.fs) es = resample(es, er.fs);
    const auto max_shift = static_cast<long>(std::lround(0.5 * rep.real.t0 * er.fs));
    const auto nr = static_cast<long>(er.size()), ns = static_cast<long>(es.size());
    double best = -1.0;
    for (long s = -max_shift; s <= max_shift; ++s) {
      // compare er[i] with es[i + s]
      const long i0 = std::max(0L, -s);
      const long i1 = std::min(nr, ns - s);
      if (i1 - i0 < 2) continue;
      const std::span<const double> a(er.samples.data() + i0, static_cast<std::size_t>(i1 - i0));
      const std::span<const double> b(es.samples.data() + i0 + s, static_cast<std::size_t>(i1 - i0));
      best = std::max(best, pearson(a, b));
    }
    rep.envelope_corr = best;
  }
  return rep;
}

}  // namespace fpcg
