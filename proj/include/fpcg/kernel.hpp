#pragma once

#include "fpcg/signal.hpp"

namespace fpcg {

/// Attack time shared by every event unless overridden (seconds).
inline constexpr double kDefaultAttack = 0.008;

/// Parameters of one S1/S2 sound event.
struct EventParams {
  double amplitude = 1.0;  // A
  double f0 = 40.0;        // carrier, Hz
  double attack = kDefaultAttack;  // Ta, s
  double tau = 0.02;       // decay constant, s
};

/// Throws ErrorKind::parameter_domain unless every field is > 0.
void validate(const EventParams& p);

/// Piecewise envelope: linear ramp t/Ta on [0, Ta), exp(-(t - Ta)/tau) after,
/// zero before the onset.
double envelope(double t, double attack, double tau);

/// A * sin(2 pi f0 t) * envelope(t).
double kernel(double t, const EventParams& p);

struct RenderOptions {
  /// Buffer spans Ta + decay_multiple * tau; the envelope at the horizon is
  /// exp(-decay_multiple).
  double decay_multiple = 8.0;
};

/// Samples the kernel at t = n / fs for n = 0 .. round((Ta + k tau) fs) - 1.
/// Throws ErrorKind::aliasing when fs < 4 f0.
Signal render_event(const EventParams& p, double fs, const RenderOptions& opt = {});

}  // namespace fpcg
