#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

namespace fpcg::test {

inline double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

inline double var_of(std::span<const double> x) {
  const double m = mean_of(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

inline double lag1_corr(std::span<const double> x) {
  const double m = mean_of(x);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    den += (x[i] - m) * (x[i] - m);
    if (i + 1 < x.size()) num += (x[i] - m) * (x[i + 1] - m);
  }
  return num / den;
}

// Kolmogorov-Smirnov distance to the uniform distribution on [lo, hi].
inline double ks_uniform(std::vector<double> x, double lo, double hi) {
  std::sort(x.begin(), x.end());
  const auto n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = (x[i] - lo) / (hi - lo);
    d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(static_cast<double>(i + 1) / n - f)});
  }
  return d;
}

// Pearson chi-square against equal bin probabilities on [lo, hi].
inline double chi_square_uniform(std::span<const double> x, double lo, double hi, std::size_t bins) {
  std::vector<double> count(bins, 0.0);
  for (double v : x) {
    auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins));
    count[std::min(b, bins - 1)] += 1.0;
  }
  const double expected = static_cast<double>(x.size()) / static_cast<double>(bins);
  double chi = 0.0;
  for (double c : count) chi += (c - expected) * (c - expected) / expected;
  return chi;
}

// Upper 1% point of chi-square with 19 degrees of freedom.
inline constexpr double kChi2_19_01 = 36.191;

// Integrated autocorrelation time by Sokal's adaptive window (c = 5).
inline double autocorr_time(std::span<const double> x) {
  const std::size_t n = x.size();
  const double m = mean_of(x);
  double c0 = 0.0;
  for (double v : x) c0 += (v - m) * (v - m);
  c0 /= static_cast<double>(n);
  double tau = 1.0;
  for (std::size_t lag = 1; lag < n / 2; ++lag) {
    double c = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) c += (x[i] - m) * (x[i + lag] - m);
    c /= static_cast<double>(n) * c0;
    tau += 2.0 * c;
    if (static_cast<double>(lag) >= 5.0 * tau) break;
  }
  return std::max(tau, 1.0);
}

// Same estimate for an ensemble flattened step-major: the per-walker
// autocorrelation functions are averaged before the window is applied.
inline double ensemble_autocorr_time(std::span<const double> flat, std::size_t walkers) {
  const std::size_t steps = flat.size() / walkers;
  std::vector<double> m(walkers, 0.0), c0(walkers, 0.0);
  for (std::size_t w = 0; w < walkers; ++w) {
    for (std::size_t s = 0; s < steps; ++s) m[w] += flat[s * walkers + w];
    m[w] /= static_cast<double>(steps);
    for (std::size_t s = 0; s < steps; ++s) c0[w] += (flat[s * walkers + w] - m[w]) * (flat[s * walkers + w] - m[w]);
  }
  double tau = 1.0;
  for (std::size_t lag = 1; lag < steps / 2; ++lag) {
    double rho = 0.0;
    for (std::size_t w = 0; w < walkers; ++w) {
      double c = 0.0;
      for (std::size_t s = 0; s + lag < steps; ++s) c += (flat[s * walkers + w] - m[w]) * (flat[(s + lag) * walkers + w] - m[w]);
      rho += c / c0[w];
    }
    tau += 2.0 * rho / static_cast<double>(walkers);
    if (static_cast<double>(lag) >= 5.0 * tau) break;
  }
  return std::max(tau, 1.0);
}

}  // namespace fpcg::test
