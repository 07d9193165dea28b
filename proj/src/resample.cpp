#include "fpcg/resample.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fpcg/error.hpp"

namespace fpcg {

namespace {

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

// Kaiser window w(r), r in [0, 1], tabulated and linearly interpolated.
class KaiserTable {
 public:
  explicit KaiserTable(double beta) : values_(kSize + 1) {
    const double i0_beta = std::cyl_bessel_i(0.0, beta);
    for (std::size_t k = 0; k <= kSize; ++k) {
      const double r = static_cast<double>(k) / kSize;
      values_[k] = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
    }
  }

  double operator()(double r) const {
    if (r >= 1.0) return values_.back();
    const double pos = r * kSize;
    const auto k = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(k);
    return values_[k] + frac * (values_[k + 1] - values_[k]);
  }

 private:
  static constexpr std::size_t kSize = 4096;
  std::vector<double> values_;
};

}  // namespace

std::vector<double> resample_to_length(std::span<const double> x, std::size_t out_len,
                                       const ResampleOptions& opt) {
  const std::size_t n = x.size();
  if (out_len == n) return {x.begin(), x.end()};
  if (n == 0 || out_len == 0) return std::vector<double>(out_len, 0.0);
  if (opt.half_taps < 1) throw Error(ErrorKind::parameter_domain, "resample: half_taps must be >= 1");

  const double step = static_cast<double>(n) / static_cast<double>(out_len);
  const double cutoff = std::min(1.0, 1.0 / step);  // fraction of input Nyquist
  const double half_width = static_cast<double>(opt.half_taps) / cutoff;
  const KaiserTable window(opt.kaiser_beta);

  std::vector<double> y(out_len, 0.0);
  for (std::size_t j = 0; j < out_len; ++j) {
    const double pos = static_cast<double>(j) * step;
    const auto lo = static_cast<std::ptrdiff_t>(std::ceil(pos - half_width));
    const auto hi = static_cast<std::ptrdiff_t>(std::floor(pos + half_width));
    double acc = 0.0;
    for (std::ptrdiff_t i = std::max<std::ptrdiff_t>(lo, 0);
         i <= std::min<std::ptrdiff_t>(hi, static_cast<std::ptrdiff_t>(n) - 1); ++i) {
      const double d = pos - static_cast<double>(i);
      const double r = d / half_width;
      const double w = window(std::abs(r));
      acc += x[static_cast<std::size_t>(i)] * cutoff * sinc(cutoff * d) * w;
    }
    y[j] = acc;
  }
  return y;
}

Signal resample(const Signal& x, double target_fs, const ResampleOptions& opt) {
  if (!(x.fs > 0.0) || !(target_fs > 0.0)) {
    throw Error(ErrorKind::parameter_domain, "resample: sample rates must be > 0");
  }
  if (target_fs == x.fs) return x;
  const auto out_len = static_cast<std::size_t>(std::lround(static_cast<double>(x.size()) * target_fs / x.fs));
  return Signal(resample_to_length(x.samples, out_len, opt), target_fs);
}

}  // namespace fpcg
