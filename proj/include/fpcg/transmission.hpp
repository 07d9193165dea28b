#pragma once

#include "fpcg/signal.hpp"

namespace fpcg {

/// Two causal exponentials h_i(t) = A_i exp(-beta_i (t - d_i)) 1(t >= d_i),
/// with onset delays d_i = r_i / c_i when `use_delays` is set.
struct TransmissionConfig {
  double a1 = 1.0;
  double beta1 = 100.0;  // 1/s
  double r1 = 0.01;      // m
  double c1 = 1500.0;    // m/s
  double a2 = 0.8;
  double beta2 = 300.0;
  double r2 = 0.03;
  double c2 = 1540.0;
  bool use_delays = true;

  friend bool operator==(const TransmissionConfig&, const TransmissionConfig&) = default;
};

void validate(const TransmissionConfig& cfg);

/// A exp(-beta (t - delay)) sampled at t = n/fs for n < round(horizon fs); the
/// delay is quantized to round(delay fs) samples. Throws
/// ErrorKind::truncation when horizon < 8 / beta.
Signal exp_kernel(double amplitude, double beta, double delay, double fs, double horizon);

/// Normalized cascade h = (h1 * h2) / integral, so that sum(h) / fs == 1.
/// The convolution integral is discretized with the trapezoid rule, which
/// keeps the discrete peak aligned with ln(beta2/beta1)/(beta2 - beta1).
/// Support: max(8/beta1, 8/beta2) + d1 + d2.
Signal cascade_response(const TransmissionConfig& cfg, double fs);

/// Causal convolution truncated to x.size(): y[n] = (1/fs) sum_m h[m] x[n-m].
/// FFT-based above kFftThreshold samples, direct otherwise.
Signal propagate(const Signal& x, const Signal& h);

inline constexpr std::size_t kFftThreshold = 4096;

}  // namespace fpcg
