#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fpcg/signal.hpp"

namespace fpcg {

struct ResampleOptions {
  int half_taps = 16;         // sinc lobes on each side at the input rate
  double kaiser_beta = 8.6;   // ~ -90 dB side lobes
};

/// Band-limited (Kaiser-windowed sinc) resampling of x onto `out_len` samples
/// spanning the same duration. Output sample j sits at input position
/// j * x.size() / out_len. When shrinking, the kernel cutoff drops to the new
/// Nyquist. out_len == x.size() returns x unchanged (bit-exact).
std::vector<double> resample_to_length(std::span<const double> x, std::size_t out_len,
                                       const ResampleOptions& opt = {});

/// Resamples to `target_fs`; output length round(n * target_fs / fs).
Signal resample(const Signal& x, double target_fs, const ResampleOptions& opt = {});

}  // namespace fpcg
