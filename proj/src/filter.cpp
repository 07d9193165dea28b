#include "fpcg/filter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fpcg/error.hpp"

namespace fpcg {

namespace {

using cplx = std::complex<double>;

// Analog Butterworth prototype poles on the unit circle, left half-plane.
std::vector<cplx> prototype_poles(int order) {
  std::vector<cplx> p;
  p.reserve(static_cast<std::size_t>(order));
  for (int k = 0; k < order; ++k) {
    const double theta = std::numbers::pi * (2.0 * k + order + 1) / (2.0 * order);
    p.emplace_back(std::cos(theta), std::sin(theta));
  }
  return p;
}

cplx bilinear(cplx s, double fs) { return (2.0 * fs + s) / (2.0 * fs - s); }

double prewarp(double f, double fs) { return 2.0 * fs * std::tan(std::numbers::pi * f / fs); }

cplx section_response(const Biquad& s, cplx z) {
  const cplx zi = 1.0 / z;
  return (s.b0 + s.b1 * zi + s.b2 * zi * zi) / (1.0 + s.a1 * zi + s.a2 * zi * zi);
}

// Groups digital poles into conjugate pairs (or a lone real pole).
std::vector<std::vector<cplx>> pair_poles(std::vector<cplx> poles) {
  std::vector<std::vector<cplx>> groups;
  std::vector<cplx> reals;
  std::vector<cplx> upper;
  for (const auto& p : poles) {
    if (std::abs(p.imag()) < 1e-12 * std::max(1.0, std::abs(p))) {
      reals.emplace_back(p.real(), 0.0);
    } else if (p.imag() > 0.0) {
      upper.push_back(p);
    }
  }
  for (const auto& p : upper) groups.push_back({p, std::conj(p)});
  for (std::size_t i = 0; i < reals.size(); i += 2) {
    if (i + 1 < reals.size()) {
      groups.push_back({reals[i], reals[i + 1]});
    } else {
      groups.push_back({reals[i]});
    }
  }
  return groups;
}

Biquad make_section(const std::vector<cplx>& poles, const std::vector<double>& zeros) {
  Biquad s;
  if (poles.size() == 2) {
    s.a1 = -(poles[0] + poles[1]).real();
    s.a2 = (poles[0] * poles[1]).real();
  } else {
    s.a1 = -poles[0].real();
    s.a2 = 0.0;
  }
  if (zeros.size() == 2) {
    s.b0 = 1.0;
    s.b1 = -(zeros[0] + zeros[1]);
    s.b2 = zeros[0] * zeros[1];
  } else {
    s.b0 = 1.0;
    s.b1 = -zeros[0];
    s.b2 = 0.0;
  }
  return s;
}

void normalize_at(Sos& sos, double f_ref, double fs) {
  const cplx z = std::polar(1.0, 2.0 * std::numbers::pi * f_ref / fs);
  for (auto& s : sos) {
    const double g = std::abs(section_response(s, z));
    s.b0 /= g;
    s.b1 /= g;
    s.b2 /= g;
  }
}

void check_order(int order) {
  if (order < 1 || order > 20) {
    throw Error(ErrorKind::parameter_domain, "butterworth: order must be in [1, 20]");
  }
}

}  // namespace

Sos butterworth_lowpass(int order, double cutoff_hz, double fs) {
  check_order(order);
  if (!(fs > 0.0) || !(cutoff_hz > 0.0) || !(cutoff_hz < 0.5 * fs)) {
    std::ostringstream os;
    os << "butterworth_lowpass: cutoff " << cutoff_hz << " Hz must lie in (0, fs/2) for fs=" << fs;
    throw Error(ErrorKind::parameter_domain, os.str());
  }
  const double wc = prewarp(cutoff_hz, fs);
  std::vector<cplx> zpoles;
  for (const auto& p : prototype_poles(order)) zpoles.push_back(bilinear(p * wc, fs));
  Sos sos;
  for (const auto& g : pair_poles(zpoles)) {
    sos.push_back(make_section(g, std::vector<double>(g.size(), -1.0)));
  }
  normalize_at(sos, 0.0, fs);
  return sos;
}

Sos butterworth_bandpass(int order, double low_hz, double high_hz, double fs) {
  check_order(order);
  if (!(fs > 0.0) || !(low_hz > 0.0) || !(low_hz < high_hz) || !(high_hz < 0.5 * fs)) {
    std::ostringstream os;
    os << "butterworth_bandpass: band (" << low_hz << ", " << high_hz
       << ") Hz must satisfy 0 < low < high < fs/2 for fs=" << fs;
    throw Error(ErrorKind::parameter_domain, os.str());
  }
  const double w1 = prewarp(low_hz, fs);
  const double w2 = prewarp(high_hz, fs);
  const double bw = w2 - w1;
  const double w0sq = w1 * w2;
  std::vector<cplx> zpoles;
  for (const auto& p : prototype_poles(order)) {
    const cplx pb = p * bw * 0.5;
    const cplx disc = std::sqrt(pb * pb - w0sq);
    zpoles.push_back(bilinear(pb + disc, fs));
    zpoles.push_back(bilinear(pb - disc, fs));
  }
  Sos sos;
  for (const auto& g : pair_poles(zpoles)) {
    // one zero at DC and one at Nyquist per pole pair
    sos.push_back(make_section(g, g.size() == 2 ? std::vector<double>{1.0, -1.0} : std::vector<double>{1.0}));
  }
  const double f_centre = std::atan(std::sqrt(w0sq) / (2.0 * fs)) * fs / std::numbers::pi;
  normalize_at(sos, f_centre, fs);
  return sos;
}

std::complex<double> frequency_response(const Sos& sos, double f_hz, double fs) {
  const cplx z = std::polar(1.0, 2.0 * std::numbers::pi * f_hz / fs);
  cplx h = 1.0;
  for (const auto& s : sos) h *= section_response(s, z);
  return h;
}

namespace {

struct State {
  double z1 = 0.0, z2 = 0.0;
};

void run(const Sos& sos, std::vector<State>& st, std::vector<double>& x) {
  for (std::size_t k = 0; k < sos.size(); ++k) {
    const Biquad& s = sos[k];
    double z1 = st[k].z1, z2 = st[k].z2;
    for (double& v : x) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
    st[k] = {z1, z2};
  }
}

// Per-section states that make a constant input `level` pass with no transient.
std::vector<State> steady_state(const Sos& sos, double level) {
  std::vector<State> st(sos.size());
  double in = level;
  for (std::size_t k = 0; k < sos.size(); ++k) {
    const Biquad& s = sos[k];
    const double g = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
    const double out = g * in;
    st[k].z1 = out - s.b0 * in;
    st[k].z2 = s.b2 * in - s.a2 * out;
    in = out;
  }
  return st;
}

}  // namespace

std::vector<double> sosfilt(const Sos& sos, std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  std::vector<State> st(sos.size());
  run(sos, st, y);
  return y;
}

std::size_t filtfilt_padlen(const Sos& sos) { return 3 * (2 * sos.size() + 1); }

std::vector<double> sosfiltfilt(const Sos& sos, std::span<const double> x) {
  const std::size_t pad = filtfilt_padlen(sos);
  const std::size_t n = x.size();
  if (n <= pad) {
    std::ostringstream os;
    os << "sosfiltfilt: input of " << n << " samples is not longer than the filter warm-up (" << pad << ")";
    throw Error(ErrorKind::parameter_domain, os.str());
  }
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  auto st = steady_state(sos, ext.front());
  run(sos, st, ext);
  std::reverse(ext.begin(), ext.end());
  st = steady_state(sos, ext.front());
  run(sos, st, ext);
  std::reverse(ext.begin(), ext.end());
  return {ext.begin() + static_cast<std::ptrdiff_t>(pad), ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

}  // namespace fpcg
