#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fpcg/error.hpp"
#include "fpcg/fft.hpp"
#include "fpcg/heart_source.hpp"
#include "stats.hpp"

using namespace fpcg;

namespace {
ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::io;
}

// Local maxima above `thresh` separated by at least `min_gap` samples.
std::size_t count_peaks(const std::vector<double>& e, double thresh, std::size_t min_gap) {
  std::size_t count = 0, last = 0;
  bool any = false;
  for (std::size_t i = 1; i + 1 < e.size(); ++i) {
    if (e[i] > thresh && e[i] >= e[i - 1] && e[i] > e[i + 1] && (!any || i - last >= min_gap)) {
      ++count;
      last = i;
      any = true;
    }
  }
  return count;
}
}  // namespace

TEST_SUITE("heart-source") {
  TEST_CASE("constant rr series") {
    HRVConfig cfg;
    const RRSeries rr = make_rr_series(RRMode::constant, cfg, 5, 1);
    REQUIRE(rr.rr.size() == 5);
    for (double v : rr.rr) CHECK(v == doctest::Approx(0.4286).epsilon(1e-4));
  }

  TEST_CASE("onset times are prefix sums") {
    RRSeries rr{{0.4, 0.5, 0.45}, RRMode::explicit_series};
    const auto t = onset_times(rr);
    REQUIRE(t.size() == 3);
    CHECK(t[0] == 0.0);
    CHECK(t[1] == doctest::Approx(0.4));
    CHECK(t[2] == doctest::Approx(0.9));
    CHECK(onset_times(RRSeries{{0.5}, RRMode::constant}) == std::vector<double>{0.0});
    const auto s = cycle_onset_samples(rr, 1000.0);
    CHECK(s == std::vector<std::size_t>{0, 400, 900});
  }

  TEST_CASE("weak hrv with alpha 0 is jitter only") {
    HRVConfig cfg;
    cfg.alpha = 0.0;
    const RRSeries a = make_rr_series(RRMode::weak_hrv, cfg, 200, 7);
    cfg.alpha = 0.02;
    const RRSeries b = make_rr_series(RRMode::weak_hrv, cfg, 200, 7);
    cfg.jitter_std = 0.0;
    cfg.alpha = 0.0;
    const RRSeries c = make_rr_series(RRMode::weak_hrv, cfg, 200, 7);
    CHECK(a.rr != b.rr);
    for (double v : c.rr) CHECK(v == cfg.mean_rr);
    const double sd = std::sqrt(test::var_of(a.rr));
    CHECK(sd == doctest::Approx(0.004).epsilon(0.15));
  }

  TEST_CASE("weak hrv sample mean") {
    HRVConfig cfg;
    const std::size_t n = 10000;
    const RRSeries rr = make_rr_series(RRMode::weak_hrv, cfg, n, 42);
    // moving-average drift is correlated over the window, which inflates the
    // variance of the mean by about the window length
    const double sd_mean = std::sqrt(cfg.drift_window * cfg.alpha * cfg.alpha + cfg.jitter_std * cfg.jitter_std) /
                           std::sqrt(static_cast<double>(n));
    CHECK(std::abs(test::mean_of(rr.rr) - cfg.mean_rr) < 3.0 * sd_mean);
    for (double v : rr.rr) {
      CHECK(v >= cfg.rr_min);
      CHECK(v <= cfg.rr_max);
    }
  }

  TEST_CASE("rr series determinism and errors") {
    HRVConfig cfg;
    CHECK(make_rr_series(RRMode::weak_hrv, cfg, 100, 3).rr == make_rr_series(RRMode::weak_hrv, cfg, 100, 3).rr);
    CHECK(make_rr_series(RRMode::weak_hrv, cfg, 100, 3).rr != make_rr_series(RRMode::weak_hrv, cfg, 100, 4).rr);
    cfg.mean_rr = 1.2;
    CHECK(kind_of([&] { make_rr_series(RRMode::constant, cfg, 5, 0); }) == ErrorKind::config);
    cfg = {};
    cfg.explicit_rr = {0.4, 0.45};
    const auto rr = make_rr_series(RRMode::explicit_series, cfg, 5, 0);
    CHECK(rr.rr == std::vector<double>{0.4, 0.45, 0.4, 0.45, 0.4});
  }

  TEST_CASE("apply_shared_tau") {
    CycleTheta t{1.0, 0.6, 0.02, 0.04, 0.2};
    const CycleTheta s = apply_shared_tau(t);
    CHECK(s.tau_s1 == doctest::Approx(0.03));
    CHECK(s.tau_s2 == doctest::Approx(0.03));
    CHECK(s.a_s1 == t.a_s1);
    CHECK(s.a_s2 == t.a_s2);
    CHECK(s.delta_t == t.delta_t);
    CycleTheta u{1.0, 0.6, 0.025, 0.025, 0.2};
    CHECK(apply_shared_tau(u) == u);
  }

  TEST_CASE("single cycle with silent S2") {
    const double fs = 1000.0;
    CycleTheta th{1.0, 0.0, 0.02, 0.02, 0.2};
    RRSeries rr{{0.45}, RRMode::constant};
    const Signal x = render_fetal_train(std::span(&th, 1), rr, {}, fs);
    REQUIRE(x.size() == 450);
    const auto first_silent = static_cast<std::size_t>(std::lround((th.delta_t + kDefaultAttack + 8 * th.tau_s1) * fs));
    double tail = 0.0;
    for (std::size_t i = first_silent; i < x.size(); ++i) tail += x[i] * x[i];
    CHECK(tail == 0.0);
    const Signal s1 = render_event({1.0, 40.0, kDefaultAttack, 0.02}, fs);
    for (std::size_t i = 0; i < s1.size(); ++i) CHECK(std::abs(x[i] - s1[i]) <= 1e-12);
  }

  TEST_CASE("identical cycles are exact copies") {
    const double fs = 1000.0;
    std::vector<CycleTheta> th(3, CycleTheta{1.0, 0.6, 0.02, 0.03, 0.2});
    RRSeries rr{{0.43, 0.43, 0.43}, RRMode::constant};
    const Signal x = render_fetal_train(th, rr, {}, fs);
    REQUIRE(x.size() == 1290);
    for (std::size_t i = 0; i < 430; ++i) {
      CHECK(x[i + 430] == x[i]);
      CHECK(x[i + 860] == x[i]);
    }
  }

  TEST_CASE("length contract with stretching") {
    HRVConfig cfg;
    const RRSeries rr = make_rr_series(RRMode::weak_hrv, cfg, 40, 9);
    std::vector<CycleTheta> th(40);
    const Signal x = render_fetal_train(th, rr, {}, 1000.0);
    std::size_t expect = 0;
    for (double v : rr.rr) expect += static_cast<std::size_t>(std::lround(v * 1000.0));
    CHECK(x.size() == expect);
  }

  TEST_CASE("superposition without stretching") {
    const double fs = 1000.0;
    std::vector<CycleTheta> th{{1.0, 0.6, 0.02, 0.03, 0.2}, {0.8, 0.9, 0.03, 0.02, 0.22}, {1.2, 0.4, 0.025, 0.025, 0.19}};
    RRSeries rr{{0.43, 0.43, 0.43}, RRMode::constant};
    const Signal x = render_fetal_train(th, rr, {}, fs);
    std::vector<double> sum(x.size(), 0.0);
    for (std::size_t k = 0; k < 3; ++k) {
      const Signal c = render_cycle(th[k], {}, fs, 430);
      for (std::size_t i = 0; i < c.size(); ++i) sum[k * 430 + i] += c[i];
    }
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(x[i] - sum[i]) < 1e-9);
  }

  TEST_CASE("envelope peak count with equal amplitudes") {
    const double fs = 1000.0;
    std::vector<CycleTheta> th(10, CycleTheta{1.0, 1.0, 0.02, 0.02, 0.2});
    RRSeries rr{std::vector<double>(10, 0.43), RRMode::constant};
    const Signal x = render_fetal_train(th, rr, {}, fs);
    const auto e = hilbert_envelope(x.samples);
    CHECK(count_peaks(e, 0.5, 100) == 20);
  }

  TEST_CASE("geometry errors name the cycle") {
    std::vector<CycleTheta> th(3, CycleTheta{});
    th[2].delta_t = 0.5;
    RRSeries rr{{0.43, 0.43, 0.43}, RRMode::constant};
    try {
      render_fetal_train(th, rr, {}, 1000.0);
      FAIL("expected cycle_geometry");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::cycle_geometry);
      CHECK(std::string(e.what()).find('2') != std::string::npos);
    }
    th[2].delta_t = 0.2;
    RRSeries short_rr{{0.43, 0.43}, RRMode::constant};
    CHECK_THROWS_AS(render_fetal_train(th, short_rr, {}, 1000.0), Error);
  }

  TEST_CASE("shared tau option equalizes decay") {
    std::vector<CycleTheta> th{{1.0, 0.6, 0.02, 0.04, 0.2}};
    RRSeries rr{{0.43}, RRMode::constant};
    FetalTrainOptions opt;
    opt.shared_tau = true;
    const Signal a = render_fetal_train(th, rr, opt, 1000.0);
    std::vector<CycleTheta> shared{apply_shared_tau(th[0])};
    const Signal b = render_fetal_train(shared, rr, {}, 1000.0);
    CHECK(a.samples == b.samples);
  }

  TEST_CASE("maternal train") {
    MaternalConfig cfg;
    const auto on = maternal_onsets(cfg, 3.0);
    REQUIRE(on.size() == 4);
    CHECK(on[1] == doctest::Approx(0.75));
    CHECK(on[3] == doctest::Approx(2.25));
    cfg.global_scale = 0.0;
    const Signal z = render_maternal_train(cfg, 3.0, 1000.0);
    CHECK(z.size() == 3000);
    CHECK(max_abs(z.samples) == 0.0);
  }

  TEST_CASE("maternal beat period from the envelope autocorrelation") {
    MaternalConfig cfg;
    const Signal x = render_maternal_train(cfg, 20.0, 1000.0);
    auto e = hilbert_envelope(x.samples);
    const double m = test::mean_of(e);
    for (double& v : e) v -= m;
    std::size_t best = 0;
    double best_val = -1e300;
    for (std::size_t lag = 500; lag <= 1000; ++lag) {
      double s = 0.0;
      for (std::size_t i = 0; i + lag < e.size(); ++i) s += e[i] * e[i + lag];
      if (s > best_val) {
        best_val = s;
        best = lag;
      }
    }
    CHECK(best == 750);
  }

  TEST_CASE("maternal and fetal share the rendering path") {
    MaternalConfig cfg;
    cfg.global_scale = 1.0;
    const Signal m = render_maternal_train(cfg, 0.75, 1000.0);
    const Signal c = render_cycle({cfg.a_s1, cfg.a_s2, cfg.tau, cfg.tau, cfg.delta_t}, cfg.events, 1000.0, 750);
    CHECK(m.samples == c.samples);
  }
}
