#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fpcg {

/// Uniformly sampled real waveform.
struct Signal {
  std::vector<double> samples;
  double fs = 0.0;  // Hz

  Signal() = default;
  Signal(std::vector<double> s, double rate) : samples(std::move(s)), fs(rate) {}
  Signal(std::size_t n, double rate) : samples(n, 0.0), fs(rate) {}

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }
  double duration() const noexcept { return fs > 0.0 ? static_cast<double>(samples.size()) / fs : 0.0; }
  double operator[](std::size_t i) const { return samples[i]; }
  double& operator[](std::size_t i) { return samples[i]; }
  std::span<const double> view() const noexcept { return samples; }
};

/// Throws unless fs > 0 and every sample is finite.
void validate(const Signal& s);

double rms(std::span<const double> x);
double mean(std::span<const double> x);
double max_abs(std::span<const double> x);

/// Elementwise a + b; throws on length or rate mismatch.
Signal add(const Signal& a, const Signal& b);

}  // namespace fpcg
