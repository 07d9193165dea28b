#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fpcg/analysis.hpp"
#include "fpcg/error.hpp"
#include "fpcg/heart_source.hpp"
#include "fpcg/noise.hpp"
#include "stats.hpp"

using namespace fpcg;

namespace {
Signal clean_train(double rr, std::size_t n, double fs = 1000.0, CycleTheta th = {}) {
  std::vector<CycleTheta> thetas(n, th);
  return render_fetal_train(thetas, RRSeries{std::vector<double>(n, rr), RRMode::constant}, {}, fs);
}

Signal tone(double f, double seconds, double fs, double amp = 1.0) {
  Signal s(static_cast<std::size_t>(seconds * fs), fs);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = amp * std::sin(2 * std::numbers::pi * f * double(i) / fs);
  return s;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::io;
}
}  // namespace

TEST_SUITE("analysis") {
  TEST_CASE("envelope of a 60 Hz tone is flat") {
    const PreprocConfig cfg;
    const Signal e = preprocess_envelope(tone(60.0, 5.0, 1000.0), cfg);
    const std::size_t warm = 500;
    const auto [lo, hi] = std::minmax_element(e.samples.begin() + warm, e.samples.end() - warm);
    CHECK((*hi - *lo) / *hi < 0.05);
    CHECK(*hi <= 1.0 + 1e-12);
  }

  TEST_CASE("zero input and scale invariance") {
    const PreprocConfig cfg;
    const Signal z = preprocess_envelope(Signal(3000, 1000.0), cfg);
    CHECK(max_abs(z.samples) == 0.0);
    const Signal x = clean_train(0.43, 10);
    Signal y = x;
    for (double& v : y.samples) v *= 37.0;
    const Signal ex = preprocess_envelope(x, cfg), ey = preprocess_envelope(y, cfg);
    for (std::size_t i = 0; i < ex.size(); ++i) CHECK(std::abs(ex[i] - ey[i]) <= 1e-9);
    for (double v : ex.samples) REQUIRE(v >= 0.0);
  }

  TEST_CASE("band handling") {
    const PreprocConfig cfg;
    CHECK(kind_of([&] { effective_band(cfg, 250.0); }) == ErrorKind::band_infeasible);
    CHECK(kind_of([&] { effective_band(cfg, 299.0); }) == ErrorKind::band_infeasible);
    const Interval b = effective_band(cfg, 333.0);
    CHECK(b.first == 20.0);
    CHECK(b.second == doctest::Approx(0.45 * 333.0));
    CHECK(effective_band(cfg, 1000.0).second == 150.0);
    CHECK(kind_of([&] { preprocess_envelope(tone(60.0, 3.0, 250.0), cfg); }) == ErrorKind::band_infeasible);
  }

  TEST_CASE("period estimate") {
    const PreprocConfig cfg;
    for (double bpm : {140.0, 150.0, 120.0}) {
      const Signal e = preprocess_envelope(clean_train(60.0 / bpm, 30), cfg);
      CHECK(std::abs(estimate_period(e, cfg) - 60.0 / bpm) <= 1.0 / 1000.0);
    }
    const Signal slow = preprocess_envelope(clean_train(1.0, 12), cfg);
    CHECK(kind_of([&] { estimate_period(slow, cfg); }) == ErrorKind::no_periodicity);
    const Signal flat(std::vector<double>(5000, 0.5), 1000.0);
    CHECK(kind_of([&] { estimate_period(flat, cfg); }) == ErrorKind::no_periodicity);
  }

  TEST_CASE("segmentation of a clean train") {
    const PreprocConfig cfg;
    const Signal x = clean_train(0.43, 10);
    const Envelopes env = compute_envelopes(x, cfg);
    const double t0 = estimate_period(env.envelope, cfg);
    const CycleSet cs = segment_cycles(env.envelope, env.onset_envelope, t0, cfg);
    REQUIRE(cs.onsets.size() == 10);
    for (std::size_t k = 0; k < 10; ++k) {
      CHECK(std::abs(static_cast<double>(cs.onsets[k]) - 430.0 * static_cast<double>(k)) <= 10.0);
    }
    CHECK(cs.size() == 9);
    for (std::size_t i = 0; i < cs.size(); ++i) {
      CHECK(std::abs(test::mean_of(cs.cycles[i])) < 1e-9);
      CHECK(max_abs(cs.cycles[i]) == doctest::Approx(1.0));
      CHECK(cs.ends[i] > cs.starts[i]);
      if (i > 0) CHECK(cs.starts[i] > cs.starts[i - 1]);
    }
    const auto wave = extract_cycles(x, cs);
    REQUIRE(wave.size() == cs.size());
    for (const auto& w : wave) CHECK(std::abs(test::mean_of(w.samples)) < 1e-9);
  }

  TEST_CASE("implausible rr cycle is discarded") {
    const double fs = 1000.0;
    const CycleTheta th;
    std::vector<double> x;
    for (int k = 0; k < 12; ++k) {
      const std::size_t n = k == 5 ? 1000 : 430;
      const Signal c = render_cycle(th, {}, fs, n);
      x.insert(x.end(), c.samples.begin(), c.samples.end());
    }
    const PreprocConfig cfg;
    const Envelopes env = compute_envelopes(Signal(x, fs), cfg);
    const CycleSet cs = segment_cycles(env.envelope, env.onset_envelope, 0.43, cfg);
    CHECK(cs.size() == 10);
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const double rr = static_cast<double>(cs.ends[i] - cs.starts[i]) / fs;
      CHECK(rr > 0.25);
      CHECK(rr < 0.90);
    }
  }

  TEST_CASE("segmentation failure") {
    const PreprocConfig cfg;
    const Signal x = clean_train(0.43, 2);
    const Envelopes env = compute_envelopes(x, cfg);
    CHECK(kind_of([&] { segment_cycles(env.envelope, env.onset_envelope, 0.43, cfg); }) == ErrorKind::segmentation);
  }

  TEST_CASE("cycle averaged acf") {
    CycleSet cs;
    cs.fs = 1000.0;
    std::vector<double> c(400);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = std::sin(0.05 * double(i)) * std::exp(-0.01 * double(i));
    cs.cycles = {c};
    const Curve one = cycle_averaged_acf(cs);
    cs.cycles = {c, c, c};
    const Curve three = cycle_averaged_acf(cs);
    CHECK(one.y.front() == 1.0);
    REQUIRE(one.y.size() == three.y.size());
    for (std::size_t i = 0; i < one.y.size(); ++i) CHECK(three.y[i] == doctest::Approx(one.y[i]).epsilon(1e-12));
    for (double v : one.y) CHECK(std::abs(v) <= 1.0 + 1e-12);
    CHECK(one.x[1] == doctest::Approx(1e-3));
  }

  TEST_CASE("welch tone peak and parseval") {
    const double fs = 1000.0;
    const Signal x = tone(50.0, 20.0, fs);
    WelchOptions opt{2000, 0.5};
    const WelchEstimate w = welch_psd(x, opt);
    const auto k = static_cast<std::size_t>(std::max_element(w.psd.begin(), w.psd.end()) - w.psd.begin());
    CHECK(std::abs(w.freq[k] - 50.0) <= w.freq[1] - w.freq[0]);
    double power = 0.0;
    for (double v : w.psd) power += v * (w.freq[1] - w.freq[0]);
    CHECK(power == doctest::Approx(0.5).epsilon(0.05));
    CHECK(w.segments == 19);

    const Curve db = welch_psd_db(x, PreprocConfig{});
    const auto kd = static_cast<std::size_t>(std::max_element(db.y.begin(), db.y.end()) - db.y.begin());
    CHECK(std::abs(db.x[kd] - 50.0) <= db.x[1] - db.x[0]);
    CHECK(db.spread.size() == db.y.size());
  }

  TEST_CASE("parseval on noise") {
    const Signal n = ar1_noise(0.6, 60000, 1000.0, 3);
    const WelchEstimate w = welch_psd(n, {1000, 0.5});
    double power = 0.0;
    for (double v : w.psd) power += v * (w.freq[1] - w.freq[0]);
    CHECK(power == doctest::Approx(test::var_of(n.samples)).epsilon(0.05));
  }

  TEST_CASE("white noise spectrum is flat") {
    const Signal n = ar1_noise(0.0, 200000, 1000.0, 4);
    const WelchEstimate w = welch_psd(n, {1000, 0.5});
    CHECK(w.segments >= 100);
    double lo = 1e300, hi = -1e300;
    for (std::size_t i = 0; i < w.freq.size(); ++i) {
      if (w.freq[i] < 20.0 || w.freq[i] > 150.0) continue;
      const double d = 10.0 * std::log10(w.psd[i]);
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    CHECK(hi - lo < 3.0);
  }

  TEST_CASE("welch segment longer than input") {
    CHECK_THROWS_AS(welch_psd(tone(50.0, 1.0, 1000.0), {2000, 0.5}), Error);
  }

  TEST_CASE("compare with itself and with a scaled copy") {
    const PreprocConfig cfg;
    Signal x = clean_train(0.43, 30);
    const Signal n = ar1_noise(0.9, x.size(), x.fs, 5);
    for (std::size_t i = 0; i < x.size(); ++i) x.samples[i] += 0.05 * n[i];
    const CompareReport self = compare_stats(x, x, cfg);
    CHECK(self.acf_rmse == 0.0);
    CHECK(self.psd_rmse_db == 0.0);
    CHECK(self.envelope_corr == doctest::Approx(1.0).epsilon(1e-12));
    Signal y = x;
    for (double& v : y.samples) v *= 0.01;
    const CompareReport sc = compare_stats(x, y, cfg);
    CHECK(sc.acf_rmse < 1e-9);
    CHECK(sc.psd_rmse_db < 1e-9);
    CHECK(sc.envelope_corr == doctest::Approx(1.0).epsilon(1e-9));
  }

  TEST_CASE("compare attributes failures to the input") {
    const PreprocConfig cfg;
    const Signal good = clean_train(0.43, 30);
    const Signal bad(std::vector<double>(good.size(), 0.0), good.fs);
    try {
      compare_stats(good, bad, cfg);
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.stage() == "sim");
    }
    try {
      compare_stats(bad, good, cfg);
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.stage() == "real");
    }
  }
}
