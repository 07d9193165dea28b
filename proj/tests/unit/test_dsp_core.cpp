#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fpcg/error.hpp"
#include "fpcg/fft.hpp"
#include "fpcg/filter.hpp"
#include "fpcg/resample.hpp"

using namespace fpcg;

namespace {
std::vector<double> random_vec(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::vector<double> v(n);
  for (double& x : v) x = z(rng);
  return v;
}
}  // namespace

TEST_SUITE("dsp-core") {
  TEST_CASE("rfft/irfft round trip") {
    for (std::size_t n : {1u, 7u, 64u, 1000u, 1023u}) {
      const auto x = random_vec(n, static_cast<unsigned>(n));
      const auto y = irfft(rfft(x), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(y[i] == doctest::Approx(x[i]).epsilon(1e-12));
    }
  }

  TEST_CASE("rfft matches a direct DFT") {
    const auto x = random_vec(30, 3);
    const auto X = rfft(x);
    for (std::size_t k = 0; k < X.size(); ++k) {
      std::complex<double> s = 0.0;
      for (std::size_t n = 0; n < x.size(); ++n) s += x[n] * std::polar(1.0, -2.0 * std::numbers::pi * double(k * n) / 30.0);
      CHECK(std::abs(X[k] - s) < 1e-10);
    }
  }

  TEST_CASE("fft convolution equals direct convolution") {
    const auto x = random_vec(5000, 1);
    const auto h = random_vec(300, 2);
    const auto a = convolve_direct(x, h);
    const auto b = convolve_fft(x, h);
    REQUIRE(a.size() == 5299);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      num += (a[i] - b[i]) * (a[i] - b[i]);
      den += a[i] * a[i];
    }
    CHECK(std::sqrt(num / den) < 1e-12);
  }

  TEST_CASE("next_fast_size") {
    CHECK(next_fast_size(1) == 1);
    CHECK(next_fast_size(7) == 8);
    CHECK(next_fast_size(97) == 100);
    CHECK(next_fast_size(1025) == 1080);
  }

  TEST_CASE("hilbert envelope of a tone is flat") {
    const double fs = 1000.0;
    std::vector<double> x(4000);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = 2.0 * std::sin(2 * std::numbers::pi * 50.0 * double(i) / fs);
    const auto e = hilbert_envelope(x);
    for (std::size_t i = 200; i < 3800; ++i) CHECK(e[i] == doctest::Approx(2.0).epsilon(1e-3));
  }

  TEST_CASE("butterworth magnitude response") {
    const double fs = 1000.0;
    const Sos lp = butterworth_lowpass(4, 8.0, fs);
    CHECK(std::abs(frequency_response(lp, 0.0, fs)) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(frequency_response(lp, 8.0, fs)) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-6));
    CHECK(std::abs(frequency_response(lp, 80.0, fs)) < 1e-3);
    const Sos bp = butterworth_bandpass(4, 20.0, 150.0, fs);
    CHECK(bp.size() == 4);
    CHECK(std::abs(frequency_response(bp, 20.0, fs)) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-6));
    CHECK(std::abs(frequency_response(bp, 150.0, fs)) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-6));
    CHECK(std::abs(frequency_response(bp, std::sqrt(20.0 * 150.0), fs)) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(std::abs(frequency_response(bp, 0.0, fs)) < 1e-12);
    CHECK(std::abs(frequency_response(bp, 400.0, fs)) < 1e-2);
  }

  TEST_CASE("zero-phase filtering keeps an impulse response symmetric") {
    const Sos bp = butterworth_bandpass(4, 20.0, 150.0, 1000.0);
    std::vector<double> x(2001, 0.0);
    x[1000] = 1.0;
    const auto y = sosfiltfilt(bp, x);
    for (std::size_t k = 1; k < 300; ++k) CHECK(std::abs(y[1000 - k] - y[1000 + k]) <= 1e-9);
    std::size_t arg = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (std::abs(y[i]) > std::abs(y[arg])) arg = i;
    }
    CHECK(arg == 1000);
  }

  TEST_CASE("sosfiltfilt passes a constant through a low-pass without edge transients") {
    const Sos lp = butterworth_lowpass(4, 8.0, 1000.0);
    const std::vector<double> x(3000, 1.5);
    const auto y = sosfiltfilt(lp, x);
    for (double v : y) CHECK(v == doctest::Approx(1.5).epsilon(1e-9));
  }

  TEST_CASE("sosfiltfilt rejects short input") {
    const Sos bp = butterworth_bandpass(4, 20.0, 150.0, 1000.0);
    std::vector<double> x(filtfilt_padlen(bp), 0.0);
    CHECK_THROWS_AS(sosfiltfilt(bp, x), Error);
  }

  TEST_CASE("resample identity and length") {
    const auto x = random_vec(500, 9);
    const auto y = resample_to_length(x, 500);
    CHECK(y == x);
    const Signal s(random_vec(3330, 4), 333.0);
    const Signal r = resample(s, 1000.0);
    CHECK(r.size() == 10000);
    CHECK(std::abs(r.duration() - s.duration()) <= 1.0 / 1000.0);
  }

  TEST_CASE("resample preserves an in-band tone") {
    const double fs = 1000.0;
    std::vector<double> x(2000);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(2 * std::numbers::pi * 40.0 * double(i) / fs);
    const auto y = resample_to_length(x, 2100);
    const double fy = fs * 2100.0 / 2000.0;
    for (std::size_t j = 100; j < 2000; ++j) {
      CHECK(y[j] == doctest::Approx(std::sin(2 * std::numbers::pi * 40.0 * double(j) / fy)).epsilon(2e-3));
    }
  }
}
