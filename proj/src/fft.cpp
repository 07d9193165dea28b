#include "fpcg/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <mutex>

namespace fpcg {

namespace {

// The FFTW planner is not re-entrant; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t bytes) : ptr(fftw_malloc(std::max<std::size_t>(bytes, 16))) {
    if (!ptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(ptr); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  void* ptr;
};

class Plan {
 public:
  explicit Plan(fftw_plan p) : plan_(p) {}
  ~Plan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
  void execute() const { fftw_execute(plan_); }

 private:
  fftw_plan plan_;
};

}  // namespace

std::vector<cdouble> rfft(std::span<const double> x, std::size_t nfft) {
  if (nfft == 0) nfft = x.size();
  if (nfft == 0) return {};
  const std::size_t nbins = nfft / 2 + 1;
  FftwBuffer in(sizeof(double) * nfft);
  FftwBuffer out(sizeof(fftw_complex) * nbins);
  auto* pin = static_cast<double*>(in.ptr);
  auto* pout = static_cast<fftw_complex*>(out.ptr);
  fftw_plan raw;
  {
    std::lock_guard lock(planner_mutex());
    raw = fftw_plan_dft_r2c_1d(static_cast<int>(nfft), pin, pout, FFTW_ESTIMATE);
  }
  Plan plan(raw);
  const std::size_t ncopy = std::min(nfft, x.size());
  std::copy_n(x.begin(), ncopy, pin);
  std::fill(pin + ncopy, pin + nfft, 0.0);
  plan.execute();
  std::vector<cdouble> result(nbins);
  for (std::size_t k = 0; k < nbins; ++k) result[k] = {pout[k][0], pout[k][1]};
  return result;
}

std::vector<double> irfft(std::span<const cdouble> spectrum, std::size_t n) {
  if (n == 0) return {};
  const std::size_t nbins = n / 2 + 1;
  FftwBuffer in(sizeof(fftw_complex) * nbins);
  FftwBuffer out(sizeof(double) * n);
  auto* pin = static_cast<fftw_complex*>(in.ptr);
  auto* pout = static_cast<double*>(out.ptr);
  fftw_plan raw;
  {
    std::lock_guard lock(planner_mutex());
    raw = fftw_plan_dft_c2r_1d(static_cast<int>(n), pin, pout, FFTW_ESTIMATE);
  }
  Plan plan(raw);
  for (std::size_t k = 0; k < nbins; ++k) {
    const cdouble v = k < spectrum.size() ? spectrum[k] : cdouble{};
    pin[k][0] = v.real();
    pin[k][1] = v.imag();
  }
  plan.execute();
  std::vector<double> result(pout, pout + n);
  const double scale = 1.0 / static_cast<double>(n);
  for (double& v : result) v *= scale;
  return result;
}

namespace {

std::vector<cdouble> complex_dft(std::span<const cdouble> x, int sign) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  FftwBuffer in(sizeof(fftw_complex) * n);
  FftwBuffer out(sizeof(fftw_complex) * n);
  auto* pin = static_cast<fftw_complex*>(in.ptr);
  auto* pout = static_cast<fftw_complex*>(out.ptr);
  fftw_plan raw;
  {
    std::lock_guard lock(planner_mutex());
    raw = fftw_plan_dft_1d(static_cast<int>(n), pin, pout, sign, FFTW_ESTIMATE);
  }
  Plan plan(raw);
  for (std::size_t i = 0; i < n; ++i) {
    pin[i][0] = x[i].real();
    pin[i][1] = x[i].imag();
  }
  plan.execute();
  std::vector<cdouble> result(n);
  for (std::size_t i = 0; i < n; ++i) result[i] = {pout[i][0], pout[i][1]};
  return result;
}

}  // namespace

std::vector<cdouble> fft(std::span<const cdouble> x) { return complex_dft(x, FFTW_FORWARD); }

std::vector<cdouble> ifft(std::span<const cdouble> x) {
  auto r = complex_dft(x, FFTW_BACKWARD);
  const double scale = r.empty() ? 1.0 : 1.0 / static_cast<double>(r.size());
  for (auto& v : r) v *= scale;
  return r;
}

std::size_t next_fast_size(std::size_t n) {
  if (n <= 1) return 1;
  for (std::size_t m = n;; ++m) {
    std::size_t r = m;
    for (std::size_t p : {2u, 3u, 5u}) {
      while (r % p == 0) r /= p;
    }
    if (r == 1) return m;
  }
}

std::vector<cdouble> analytic_signal(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  std::vector<cdouble> buf(x.begin(), x.end());
  auto spec = fft(buf);
  // h = [1, 2, ..., 2, (1 at Nyquist for even n), 0, ...]
  const std::size_t half = n / 2;
  for (std::size_t k = 1; k < n; ++k) {
    if (k < (n + 1) / 2) {
      spec[k] *= 2.0;
    } else if (n % 2 == 0 && k == half) {
      // keep
    } else {
      spec[k] = 0.0;
    }
  }
  return ifft(spec);
}

std::vector<double> hilbert_envelope(std::span<const double> x) {
  auto a = analytic_signal(x);
  std::vector<double> env(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) env[i] = std::abs(a[i]);
  return env;
}

std::vector<double> convolve_direct(std::span<const double> x, std::span<const double> h) {
  if (x.empty() || h.empty()) return {};
  std::vector<double> y(x.size() + h.size() - 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    for (std::size_t j = 0; j < h.size(); ++j) y[i + j] += xi * h[j];
  }
  return y;
}

std::vector<double> convolve_fft(std::span<const double> x, std::span<const double> h) {
  if (x.empty() || h.empty()) return {};
  const std::size_t n = x.size() + h.size() - 1;
  const std::size_t nfft = next_fast_size(n);
  auto X = rfft(x, nfft);
  const auto H = rfft(h, nfft);
  for (std::size_t k = 0; k < X.size(); ++k) X[k] *= H[k];
  auto y = irfft(X, nfft);
  y.resize(n);
  return y;
}

}  // namespace fpcg
