#include "fpcg/transmission.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fpcg/error.hpp"
#include "fpcg/fft.hpp"

namespace fpcg {

void validate(const TransmissionConfig& cfg) {
  if (!(cfg.a1 > 0.0) || !(cfg.a2 > 0.0)) throw Error(ErrorKind::config, "transmission gains A1, A2 must be > 0");
  if (!(cfg.beta1 > 0.0) || !(cfg.beta2 > 0.0)) throw Error(ErrorKind::config, "transmission beta1, beta2 must be > 0");
  if (!(cfg.r1 >= 0.0) || !(cfg.r2 >= 0.0)) throw Error(ErrorKind::config, "path lengths r1, r2 must be >= 0");
  if (!(cfg.c1 > 0.0) || !(cfg.c2 > 0.0)) throw Error(ErrorKind::config, "propagation speeds c1, c2 must be > 0");
}

Signal exp_kernel(double amplitude, double beta, double delay, double fs, double horizon) {
  if (!(beta > 0.0) || !(fs > 0.0) || !(delay >= 0.0)) {
    throw Error(ErrorKind::parameter_domain, "exp_kernel: beta, fs must be > 0 and delay >= 0");
  }
  if (horizon < 8.0 / beta) {
    std::ostringstream os;
    os << "exp_kernel: horizon " << horizon << " s is shorter than 8/beta = " << 8.0 / beta << " s";
    throw Error(ErrorKind::truncation, os.str());
  }
  const auto n = static_cast<std::size_t>(std::lround(horizon * fs));
  const auto d = static_cast<std::size_t>(std::lround(delay * fs));
  Signal out(n, fs);
  for (std::size_t i = d; i < n; ++i) {
    out[i] = amplitude * std::exp(-beta * static_cast<double>(i - d) / fs);
  }
  return out;
}

Signal cascade_response(const TransmissionConfig& cfg, double fs) {
  validate(cfg);
  const double d1 = cfg.use_delays ? cfg.r1 / cfg.c1 : 0.0;
  const double d2 = cfg.use_delays ? cfg.r2 / cfg.c2 : 0.0;
  const double horizon = std::max(8.0 / cfg.beta1, 8.0 / cfg.beta2) + d1 + d2;
  const Signal h1 = exp_kernel(cfg.a1, cfg.beta1, d1, fs, horizon);
  const Signal h2 = exp_kernel(cfg.a2, cfg.beta2, d2, fs, horizon);
  const std::size_t n = h1.size();
  const auto k1 = static_cast<std::size_t>(std::lround(d1 * fs));
  const auto k2 = static_cast<std::size_t>(std::lround(d2 * fs));

  Signal h(n, fs);
  for (std::size_t t = 0; t < n; ++t) {
    if (t < k1 + k2) continue;
    // trapezoid over m in [k1, t - k2]
    const std::size_t lo = k1, hi = t - k2;
    double acc = 0.0;
    for (std::size_t m = lo; m <= hi; ++m) acc += h1[m] * h2[t - m];
    acc -= 0.5 * (h1[lo] * h2[t - lo] + h1[hi] * h2[t - hi]);
    h[t] = acc / fs;
  }
  double area = 0.0;
  for (double v : h.samples) area += v;
  area /= fs;
  if (!(area > 0.0) || !std::isfinite(area)) {
    throw Error(ErrorKind::degenerate, "cascade_response: cascade has zero energy on the sampling grid");
  }
  for (double& v : h.samples) v /= area;
  return h;
}

Signal propagate(const Signal& x, const Signal& h) {
  if (x.fs != h.fs) {
    std::ostringstream os;
    os << "propagate: sample rate mismatch (signal " << x.fs << " Hz, response " << h.fs << " Hz)";
    throw Error(ErrorKind::parameter_domain, os.str());
  }
  if (x.empty()) return Signal(0, x.fs);
  if (h.empty()) throw Error(ErrorKind::degenerate, "propagate: empty impulse response");
  auto full = x.size() > kFftThreshold ? convolve_fft(x.samples, h.samples) : convolve_direct(x.samples, h.samples);
  full.resize(x.size());
  const double dt = 1.0 / x.fs;
  for (double& v : full) v *= dt;
  return Signal(std::move(full), x.fs);
}

}  // namespace fpcg
