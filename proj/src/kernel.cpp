#include "fpcg/kernel.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "fpcg/error.hpp"

namespace fpcg {

void validate(const EventParams& p) {
  if (!(p.amplitude > 0.0) || !(p.f0 > 0.0) || !(p.attack > 0.0) || !(p.tau > 0.0)) {
    std::ostringstream os;
    os << "event parameters must be positive (A=" << p.amplitude << ", f0=" << p.f0
       << ", Ta=" << p.attack << ", tau=" << p.tau << ")";
    throw Error(ErrorKind::parameter_domain, os.str());
  }
}

double envelope(double t, double attack, double tau) {
  if (!(attack > 0.0) || !(tau > 0.0)) {
    throw Error(ErrorKind::parameter_domain, "envelope: attack and tau must be > 0");
  }
  if (t < 0.0) return 0.0;
  if (t < attack) return t / attack;
  return std::exp(-(t - attack) / tau);
}

double kernel(double t, const EventParams& p) {
  if (t < 0.0) return 0.0;
  return p.amplitude * std::sin(2.0 * std::numbers::pi * p.f0 * t) * envelope(t, p.attack, p.tau);
}

Signal render_event(const EventParams& p, double fs, const RenderOptions& opt) {
  validate(p);
  if (!(fs > 0.0)) throw Error(ErrorKind::parameter_domain, "render_event: fs must be > 0");
  if (fs < 4.0 * p.f0) {
    std::ostringstream os;
    os << "render_event: fs=" << fs << " Hz is below 4*f0=" << 4.0 * p.f0 << " Hz";
    throw Error(ErrorKind::aliasing, os.str());
  }
  if (!(opt.decay_multiple > 0.0)) {
    throw Error(ErrorKind::parameter_domain, "render_event: decay_multiple must be > 0");
  }
  const auto n = static_cast<std::size_t>(std::lround((p.attack + opt.decay_multiple * p.tau) * fs));
  Signal out(n, fs);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = kernel(static_cast<double>(i) / fs, p);
  }
  return out;
}

}  // namespace fpcg
