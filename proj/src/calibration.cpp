#include "fpcg/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "fpcg/error.hpp"
#include "fpcg/fft.hpp"
#include "fpcg/filter.hpp"
#include "fpcg/kernel.hpp"

namespace fpcg {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct EventShape {
  double amplitude, f0, tau, offset;
};

std::array<EventShape, 2> shapes(const CycleTheta& th, const EventPair& ev) {
  return {EventShape{th.a_s1, ev.f0_s1, th.tau_s1, 0.0}, EventShape{th.a_s2, ev.f0_s2, th.tau_s2, th.delta_t}};
}

// Support of one event in samples, identical to render_event.
double support(double attack, double tau, double k, double fs) {
  return static_cast<double>(std::lround((attack + k * tau) * fs)) / fs;
}

using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;

Vec5 to_vec(const CycleTheta& t) {
  Vec5 v;
  const auto a = t.to_array();
  for (int i = 0; i < 5; ++i) v[i] = a[static_cast<std::size_t>(i)];
  return v;
}

CycleTheta from_vec(const Vec5& v) {
  ThetaVector a;
  for (int i = 0; i < 5; ++i) a[static_cast<std::size_t>(i)] = v[i];
  return CycleTheta::from_array(a);
}

Vec5 project(Vec5 v, const ParamBounds& b) {
  for (int i = 0; i < 5; ++i) {
    const auto k = static_cast<std::size_t>(i);
    v[i] = std::clamp(v[i], b.lower[k], b.upper[k]);
  }
  return v;
}

double sum_sq_diff(std::span<const double> y, std::span<const double> m) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - m[i]) * (y[i] - m[i]);
  return s;
}

// Amplitudes by linear least squares for fixed decays and dT.
std::pair<double, double> solve_amplitudes(std::span<const double> y, const std::vector<double>& u1,
                                           const std::vector<double>& u2) {
  double s11 = 0, s12 = 0, s22 = 0, b1 = 0, b2 = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    s11 += u1[i] * u1[i];
    s12 += u1[i] * u2[i];
    s22 += u2[i] * u2[i];
    b1 += u1[i] * y[i];
    b2 += u2[i] * y[i];
  }
  const double det = s11 * s22 - s12 * s12;
  if (std::abs(det) <= 1e-14 * std::max(1.0, s11 * s22)) {
    return {s11 > 0 ? b1 / s11 : 0.0, s22 > 0 ? b2 / s22 : 0.0};
  }
  return {(b1 * s22 - b2 * s12) / det, (s11 * b2 - s12 * b1) / det};
}

// Local maxima of v (interior), parabolic position and height.
struct Peak {
  double pos, height;
};

std::vector<Peak> local_peaks(std::span<const double> v) {
  std::vector<Peak> out;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (v[i] > v[i - 1] && v[i] >= v[i + 1]) {
      const double y0 = v[i - 1], y1 = v[i], y2 = v[i + 1];
      const double den = y0 - 2.0 * y1 + y2;
      double d = 0.0;
      if (den < 0.0) d = std::clamp(0.5 * (y0 - y2) / den, -0.5, 0.5);
      out.push_back({static_cast<double>(i) + d, y1 - 0.25 * (y0 - y2) * d});
    }
  }
  return out;
}

}  // namespace

std::vector<double> cycle_model(const CycleTheta& theta, const EventPair& events, double fs, std::size_t n,
                                FitDomain domain, double decay_multiple) {
  std::vector<double> m(n, 0.0);
  for (const auto& e : shapes(theta, events)) {
    if (e.amplitude == 0.0) continue;
    const double end = support(events.attack, e.tau, decay_multiple, fs);
    const auto first = static_cast<std::size_t>(std::max(0.0, std::ceil(e.offset * fs - 1e-9)));
    for (std::size_t i = first; i < n; ++i) {
      const double u = static_cast<double>(i) / fs - e.offset;
      if (u < 0.0) continue;
      if (u >= end - 1e-12) break;
      const double a = envelope(u, events.attack, e.tau);
      m[i] += domain == FitDomain::waveform ? e.amplitude * std::sin(kTwoPi * e.f0 * u) * a : e.amplitude * a;
    }
  }
  return m;
}

std::vector<double> cycle_model_jacobian(const CycleTheta& theta, const EventPair& events, double fs, std::size_t n,
                                         FitDomain domain, double decay_multiple) {
  std::vector<double> jac(n * 5, 0.0);
  const auto sh = shapes(theta, events);
  const double ta = events.attack;
  for (std::size_t k = 0; k < 2; ++k) {
    const auto& e = sh[k];
    const double end = support(ta, e.tau, decay_multiple, fs);
    const auto first = static_cast<std::size_t>(std::max(0.0, std::ceil(e.offset * fs - 1e-9)));
    for (std::size_t i = first; i < n; ++i) {
      const double u = static_cast<double>(i) / fs - e.offset;
      if (u < 0.0) continue;
      if (u >= end - 1e-12) break;
      const double a = envelope(u, ta, e.tau);
      const double da_du = u < ta ? 1.0 / ta : -a / e.tau;
      const double da_dtau = u < ta ? 0.0 : a * (u - ta) / (e.tau * e.tau);
      const double s = domain == FitDomain::waveform ? std::sin(kTwoPi * e.f0 * u) : 1.0;
      const double ds = domain == FitDomain::waveform ? kTwoPi * e.f0 * std::cos(kTwoPi * e.f0 * u) : 0.0;
      double* row = &jac[i * 5];
      row[k] += s * a;                        // dA
      row[2 + k] += e.amplitude * s * da_dtau;  // dtau
      if (k == 1) row[4] += -e.amplitude * (ds * a + s * da_du);  // ddT
    }
  }
  return jac;
}

FitResult fit_cycle(const Signal& cycle, const CycleTheta& init, const ParamBounds& bounds, const EventPair& events,
                    const FitOptions& opt) {
  validate(cycle);
  validate(bounds);
  if (!bounds.contains(init)) throw Error(ErrorKind::parameter_domain, "fit initial point outside bounds");
  const double fs = cycle.fs;
  const std::size_t n = cycle.size();
  const auto& y = cycle.samples;
  auto model = [&](const Vec5& v) { return cycle_model(from_vec(v), events, fs, n, opt.domain, opt.decay_multiple); };

  Vec5 theta = to_vec(init);
  double cost = sum_sq_diff(y, model(theta));
  double energy = 0.0;
  for (double v : y) energy += v * v;

  FitResult res;
  res.theta = init;
  const double tiny = 1e-28 * std::max(energy, 1e-300);
  if (cost <= tiny) {
    res.converged = true;
    res.residual_rms = n ? std::sqrt(cost / static_cast<double>(n)) : 0.0;
    return res;
  }

  // Coarse dT search with amplitudes solved linearly.
  if (opt.delta_t_grid) {
    const double half = std::max(opt.grid_half_width, 0.15 * init.delta_t);
    const double lo = std::max(bounds.lower[4], init.delta_t - half);
    const double hi = std::min(bounds.upper[4], init.delta_t + half);
    CycleTheta probe = init;
    probe.a_s1 = 1.0;
    probe.a_s2 = 0.0;
    const auto u1 = cycle_model(probe, events, fs, n, opt.domain, opt.decay_multiple);
    double best_cost = cost;
    Vec5 best = theta;
    const auto steps = static_cast<long>(std::floor((hi - lo) * fs));
    for (long s = 0; s <= steps; ++s) {
      CycleTheta p = init;
      p.delta_t = lo + static_cast<double>(s) / fs;
      p.a_s1 = 0.0;
      p.a_s2 = 1.0;
      const auto u2 = cycle_model(p, events, fs, n, opt.domain, opt.decay_multiple);
      auto [a1, a2] = solve_amplitudes(y, u1, u2);
      p.a_s1 = std::clamp(a1, bounds.lower[0], bounds.upper[0]);
      p.a_s2 = std::clamp(a2, bounds.lower[1], bounds.upper[1]);
      const double c = sum_sq_diff(y, model(to_vec(p)));
      if (c < best_cost) {
        best_cost = c;
        best = to_vec(p);
      }
    }
    theta = best;
    cost = best_cost;
  }

  double lambda = 1e-3;
  int it = 0;
  bool converged = false;
  for (; it < opt.max_iterations; ++it) {
    const CycleTheta th = from_vec(theta);
    const auto m = model(theta);
    const auto jac = cycle_model_jacobian(th, events, fs, n, opt.domain, opt.decay_multiple);
    Mat5 jtj = Mat5::Zero();
    Vec5 jtr = Vec5::Zero();
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::Map<const Vec5> row(&jac[i * 5]);
      jtj.noalias() += row * row.transpose();
      jtr.noalias() += row * (y[i] - m[i]);
    }
    bool accepted = false;
    bool tiny_step = false;
    while (!accepted) {
      Mat5 a = jtj;
      for (int d = 0; d < 5; ++d) a(d, d) += lambda * std::max(jtj(d, d), 1e-12);
      const Vec5 delta = a.ldlt().solve(jtr);
      const Vec5 cand = project(theta + delta, bounds);
      const Vec5 step = cand - theta;
      double rel_step = 0.0;
      for (int d = 0; d < 5; ++d) rel_step = std::max(rel_step, std::abs(step[d]) / std::max(std::abs(theta[d]), 1e-3));
      if (rel_step < opt.step_tol) {
        tiny_step = true;
        break;
      }
      const double c = sum_sq_diff(y, model(cand));
      if (c < cost) {
        const double rel = (cost - c) / cost;
        theta = cand;
        cost = c;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        if (rel < opt.rel_cost_tol || cost <= tiny) converged = true;
      } else {
        lambda *= 4.0;
        if (lambda > 1e16) {
          tiny_step = true;
          break;
        }
      }
    }
    if (tiny_step) {
      converged = true;
      ++it;
      break;
    }
    if (converged) {
      ++it;
      break;
    }
  }
  res.theta = from_vec(theta);
  res.iterations = it;
  res.converged = converged;
  res.residual_rms = n ? std::sqrt(cost / static_cast<double>(n)) : 0.0;
  return res;
}

ParamSummary summarize_parameters(std::span<const FitResult> fits, const ParamBounds& global,
                                  const SummaryOptions& opt) {
  validate(global);
  std::vector<ThetaVector> v;
  for (const auto& f : fits) {
    if (f.converged) v.push_back(f.theta.to_array());
  }
  if (v.size() < std::max<std::size_t>(opt.min_fits, 2)) {
    std::ostringstream os;
    os << "need at least " << opt.min_fits << " converged fits, got " << v.size();
    throw Error(ErrorKind::insufficient_data, os.str());
  }
  ParamSummary s;
  s.n_cycles = v.size();
  const auto n = static_cast<double>(v.size());
  for (const auto& t : v) {
    for (std::size_t i = 0; i < kThetaDim; ++i) s.mean[i] += t[i] / n;
  }
  for (const auto& t : v) {
    for (std::size_t i = 0; i < kThetaDim; ++i) {
      for (std::size_t j = 0; j < kThetaDim; ++j) s.covariance[i][j] += (t[i] - s.mean[i]) * (t[j] - s.mean[j]);
    }
  }
  for (auto& row : s.covariance) {
    for (double& c : row) c /= (n - 1.0);
  }
  for (std::size_t i = 0; i < kThetaDim; ++i) {
    const double sd = std::sqrt(std::max(0.0, s.covariance[i][i]));
    const double glo = global.lower[i], ghi = global.upper[i];
    double lo = std::clamp(s.mean[i] - opt.dispersion_mult * sd, glo, ghi);
    double hi = std::clamp(s.mean[i] + opt.dispersion_mult * sd, glo, ghi);
    const double min_w = opt.min_width_frac * (ghi - glo);
    if (hi - lo < min_w) {
      const double c = std::clamp(s.mean[i], glo + 0.5 * min_w, ghi - 0.5 * min_w);
      lo = c - 0.5 * min_w;
      hi = c + 0.5 * min_w;
    }
    s.box.lower[i] = lo;
    s.box.upper[i] = hi;
  }
  return s;
}

CornerData gaussian_corner_samples(const ParamSummary& summary, std::size_t n, std::uint64_t seed, std::size_t bins) {
  if (bins == 0) throw Error(ErrorKind::parameter_domain, "corner histograms need at least one bin");
  Mat5 cov;
  Vec5 mu;
  for (int i = 0; i < 5; ++i) {
    mu[i] = summary.mean[static_cast<std::size_t>(i)];
    for (int j = 0; j < 5; ++j) {
      const auto a = static_cast<std::size_t>(i), b = static_cast<std::size_t>(j);
      cov(i, j) = 0.5 * (summary.covariance[a][b] + summary.covariance[b][a]);
    }
  }
  Eigen::SelfAdjointEigenSolver<Mat5> eig(cov);
  const double floor = 1e-12 * std::max(cov.trace(), 0.0);
  Vec5 sd = eig.eigenvalues().cwiseMax(floor).cwiseSqrt();
  if (cov.trace() <= 0.0) sd.setZero();
  const Mat5 factor = eig.eigenvectors() * sd.asDiagonal();

  CornerData out;
  out.samples.resize(n);
  Rng rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  for (auto& s : out.samples) {
    Vec5 w;
    for (int i = 0; i < 5; ++i) w[i] = z(rng);
    const Vec5 x = mu + factor * w;
    for (int i = 0; i < 5; ++i) s[static_cast<std::size_t>(i)] = x[i];
  }

  // Plot ranges: mean +/- 4 sd per component.
  std::array<std::pair<double, double>, kThetaDim> range;
  for (std::size_t i = 0; i < kThetaDim; ++i) {
    const double s = std::sqrt(std::max(cov(static_cast<int>(i), static_cast<int>(i)), 0.0));
    const double h = s > 0.0 ? 4.0 * s : std::max(1e-6, 1e-3 * std::abs(summary.mean[i]));
    range[i] = {summary.mean[i] - h, summary.mean[i] + h};
  }
  auto edges = [&](std::size_t i) {
    std::vector<double> e(bins + 1);
    for (std::size_t b = 0; b <= bins; ++b) {
      e[b] = range[i].first + (range[i].second - range[i].first) * static_cast<double>(b) / static_cast<double>(bins);
    }
    return e;
  };
  auto bin_of = [&](std::size_t i, double v) -> long {
    const double f = (v - range[i].first) / (range[i].second - range[i].first);
    if (f < 0.0 || f > 1.0) return -1;
    return std::min(static_cast<long>(f * static_cast<double>(bins)), static_cast<long>(bins) - 1);
  };
  const double total = n ? static_cast<double>(n) : 1.0;
  for (std::size_t i = 0; i < kThetaDim; ++i) {
    auto& h = out.marginals[i];
    h.edges = edges(i);
    h.density.assign(bins, 0.0);
    const double w = (range[i].second - range[i].first) / static_cast<double>(bins);
    for (const auto& s : out.samples) {
      const long b = bin_of(i, s[i]);
      if (b >= 0) h.density[static_cast<std::size_t>(b)] += 1.0 / (total * w);
    }
  }
  for (std::size_t i = 0; i < kThetaDim; ++i) {
    for (std::size_t j = i + 1; j < kThetaDim; ++j) {
      Grid2D g;
      g.i = i;
      g.j = j;
      g.x_edges = edges(i);
      g.y_edges = edges(j);
      g.density.assign(bins * bins, 0.0);
      const double area = (range[i].second - range[i].first) * (range[j].second - range[j].first) /
                          static_cast<double>(bins * bins);
      for (const auto& s : out.samples) {
        const long bx = bin_of(i, s[i]), by = bin_of(j, s[j]);
        if (bx >= 0 && by >= 0) g.density[static_cast<std::size_t>(bx) * bins + static_cast<std::size_t>(by)] += 1.0 / (total * area);
      }
      out.pairs.push_back(std::move(g));
    }
  }
  return out;
}

std::vector<double> measure_delta_t(const CycleSet& cycles, const DeltaTOptions& opt) {
  std::vector<double> out;
  const auto guard = static_cast<std::size_t>(std::lround(opt.edge_guard * cycles.fs));
  for (std::size_t k = 0; k < cycles.size(); ++k) {
    const auto& c = cycles.cycles[k];
    if (c.size() < 3) continue;
    if (k < cycles.starts.size() && cycles.starts[k] < guard) continue;
    const double base = *std::min_element(c.begin(), c.end());
    auto peaks = local_peaks(c);
    if (peaks.size() < 2) continue;
    std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.height > b.height; });
    const Peak& p1 = peaks[0];
    const Peak* p2 = nullptr;
    for (std::size_t k = 1; k < peaks.size(); ++k) {
      if (std::abs(peaks[k].pos - p1.pos) / cycles.fs >= opt.min_separation) {
        p2 = &peaks[k];
        break;
      }
    }
    if (!p2) continue;
    if (p2->height - base < opt.min_relative_height * (p1.height - base)) continue;
    out.push_back(std::abs(p2->pos - p1.pos) / cycles.fs);
  }
  if (out.empty()) throw Error(ErrorKind::insufficient_data, "no cycle with two separable envelope peaks");
  return out;
}

CycleTheta initial_guess(const Signal& cycle, [[maybe_unused]] const EventPair& events, const ParamBounds& bounds,
                         std::optional<double> delta_t) {
  validate(cycle);
  const double fs = cycle.fs;
  const std::size_t n = cycle.size();
  auto env = hilbert_envelope(cycle.view());
  const Sos lp = butterworth_lowpass(2, std::min(40.0, 0.2 * fs), fs);
  if (n > filtfilt_padlen(lp)) env = sosfiltfilt(lp, env);

  auto peak_in = [&](double t_lo, double t_hi) {
    const auto a = static_cast<std::size_t>(std::clamp(t_lo * fs, 0.0, static_cast<double>(n - 1)));
    const auto b = static_cast<std::size_t>(std::clamp(t_hi * fs, 0.0, static_cast<double>(n - 1)));
    std::size_t m = a;
    for (std::size_t i = a; i <= b; ++i) {
      if (env[i] > env[m]) m = i;
    }
    return m;
  };
  auto fall_time = [&](std::size_t p, std::size_t limit) {
    const double target = env[p] * std::exp(-1.0);
    std::size_t i = p;
    while (i + 1 < limit && env[i] > target) ++i;
    return static_cast<double>(i - p) / fs;
  };

  CycleTheta th;
  const std::size_t p1 = peak_in(0.0, 0.08);
  double dt = 0.0;
  if (delta_t) {
    dt = *delta_t;
  } else {
    const std::size_t p2 = peak_in(static_cast<double>(p1) / fs + bounds.lower[4], static_cast<double>(p1) / fs + bounds.upper[4]);
    dt = static_cast<double>(p2 - p1) / fs;
  }
  const std::size_t p2 = peak_in(static_cast<double>(p1) / fs + dt - 0.02, static_cast<double>(p1) / fs + dt + 0.02);
  th.a_s1 = env[p1];
  th.a_s2 = env[p2];
  th.tau_s1 = fall_time(p1, std::min(p2, n));
  th.tau_s2 = fall_time(p2, n);
  th.delta_t = dt;
  auto v = th.to_array();
  for (std::size_t i = 0; i < kThetaDim; ++i) v[i] = std::clamp(v[i], bounds.lower[i], bounds.upper[i]);
  return CycleTheta::from_array(v);
}

CalibrationResult calibrate_recording(const Signal& x, const CalibrationOptions& opt) {
  CalibrationResult res;
  try {
    res.analysis = analyze(x, opt.preproc);
  } catch (const Error& e) {
    throw e.with_stage("analysis");
  }
  try {
    res.delta_t_measured = measure_delta_t(res.analysis.cycles);
  } catch (const Error&) {
    // dT then comes from each cycle's own envelope
  }
  double dt_median = 0.0;
  if (!res.delta_t_measured.empty()) {
    auto v = res.delta_t_measured;
    std::nth_element(v.begin(), v.begin() + static_cast<long>(v.size() / 2), v.end());
    dt_median = v[v.size() / 2];
  }

  const auto cycles = extract_cycles(res.analysis.envelopes.bandpassed, res.analysis.cycles);
  const double fs = x.fs;
  FitOptions coarse = opt.fit;
  coarse.max_iterations = 0;
  for (std::size_t k = 0; k < cycles.size(); ++k) {
    const Signal& c = cycles[k];
    std::optional<double> dt;
    if (dt_median > 0.0) dt = std::clamp(dt_median, opt.bounds.lower[4], opt.bounds.upper[4]);
    // Onsets come from a threshold rule; search the S1 lead before fitting.
    const auto max_lead = static_cast<std::size_t>(std::lround(opt.max_alignment * fs));
    FitResult best;
    std::size_t best_lead = 0;
    double best_rms = INFINITY;
    for (std::size_t lead = 0; lead <= max_lead && lead + 8 < c.size(); ++lead) {
      Signal trimmed(std::vector<double>(c.samples.begin() + static_cast<long>(lead), c.samples.end()), fs);
      const CycleTheta init = initial_guess(trimmed, opt.events, opt.bounds, dt);
      FitResult r = fit_cycle(trimmed, init, opt.bounds, opt.events, coarse);
      if (r.residual_rms < best_rms) {
        best_rms = r.residual_rms;
        best_lead = lead;
        best = r;
      }
    }
    Signal trimmed(std::vector<double>(c.samples.begin() + static_cast<long>(best_lead), c.samples.end()), fs);
    FitOptions fine = opt.fit;
    fine.delta_t_grid = false;
    FitResult r = fit_cycle(trimmed, best.theta, opt.bounds, opt.events, fine);
    r.cycle_index = k;
    res.fits.push_back(r);
  }
  try {
    res.summary = summarize_parameters(res.fits, opt.bounds, opt.summary);
  } catch (const Error& e) {
    throw e.with_stage("calibration");
  }
  res.corner = gaussian_corner_samples(res.summary, opt.corner_samples, opt.seed, opt.corner_bins);
  return res;
}

}  // namespace fpcg
