#pragma once

#include <complex>
#include <span>
#include <vector>

namespace fpcg {

/// Second-order section, a0 normalized to 1 (transposed direct form II).
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

using Sos = std::vector<Biquad>;

/// Digital Butterworth designs via the bilinear transform with prewarping.
/// Each section is scaled to unit gain at the reference frequency (DC for the
/// low-pass, the warped geometric band centre for the band-pass).
Sos butterworth_lowpass(int order, double cutoff_hz, double fs);
/// `order` is the prototype order; the band-pass has 2*order poles.
Sos butterworth_bandpass(int order, double low_hz, double high_hz, double fs);

std::complex<double> frequency_response(const Sos& sos, double f_hz, double fs);

/// Causal filtering from a zero initial state.
std::vector<double> sosfilt(const Sos& sos, std::span<const double> x);

/// Samples of odd extension added at each end by sosfiltfilt.
std::size_t filtfilt_padlen(const Sos& sos);

/// Forward-backward (zero-phase) filtering with odd-extension padding and
/// steady-state initial conditions. Throws ErrorKind::parameter_domain when
/// x is not longer than filtfilt_padlen().
std::vector<double> sosfiltfilt(const Sos& sos, std::span<const double> x);

}  // namespace fpcg
