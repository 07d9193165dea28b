#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "fpcg/error.hpp"
#include "fpcg/sampler.hpp"
#include "stats.hpp"

using namespace fpcg;

namespace {
std::vector<double> component(const std::vector<CycleTheta>& th, std::size_t c) {
  std::vector<double> v;
  v.reserve(th.size());
  for (const auto& t : th) v.push_back(t.to_array()[c]);
  return v;
}
}  // namespace

TEST_SUITE("sampler") {
  TEST_CASE("default boxes are nested") {
    const ParamBounds g = global_physiologic_bounds();
    const ParamBounds b = default_sampling_box();
    CHECK_NOTHROW(validate(g));
    CHECK_NOTHROW(validate(b));
    for (std::size_t i = 0; i < kThetaDim; ++i) {
      CHECK(g.lower[i] <= b.lower[i]);
      CHECK(b.upper[i] <= g.upper[i]);
    }
    CHECK(b.upper[4] < 60.0 / 140.0);
  }

  TEST_CASE("uniform marginals") {
    ParamBounds b = default_sampling_box();
    b.lower[0] = 0.5;
    b.upper[0] = 1.5;
    const auto th = sample_thetas({}, b, 100000, 1);
    REQUIRE(th.size() == 100000);
    for (const auto& t : th) REQUIRE(b.contains(t));
    CHECK(std::abs(test::mean_of(component(th, 0)) - 1.0) < 0.01);
    for (std::size_t c = 0; c < kThetaDim; ++c) {
      CHECK(test::chi_square_uniform(component(th, c), b.lower[c], b.upper[c], 20) < test::kChi2_19_01);
    }
  }

  TEST_CASE("degenerate box") {
    ParamBounds b = default_sampling_box();
    const double eps = 1e-9;
    for (std::size_t i = 0; i < kThetaDim; ++i) b.upper[i] = b.lower[i] + eps;
    for (const auto& t : sample_thetas({}, b, 1000, 2)) {
      const auto a = t.to_array();
      for (std::size_t i = 0; i < kThetaDim; ++i) CHECK(a[i] - b.lower[i] <= eps);
    }
  }

  TEST_CASE("wide truncated gaussian looks uniform") {
    const ParamBounds b = default_sampling_box();
    PriorSpec p;
    p.kind = PriorKind::truncated_gaussian;
    ThetaVector big = b.width();
    for (double& v : big) v *= 10.0;
    p.std = big;
    const auto th = sample_thetas(p, b, 20000, 3);
    for (std::size_t c = 0; c < kThetaDim; ++c) {
      // 1% critical value for n = 20000
      CHECK(test::ks_uniform(component(th, c), b.lower[c], b.upper[c]) < 1.63 / std::sqrt(20000.0));
    }
  }

  TEST_CASE("truncated gaussian concentrates and fails when mis-specified") {
    const ParamBounds b = default_sampling_box();
    PriorSpec p;
    p.kind = PriorKind::truncated_gaussian;
    const auto th = sample_thetas(p, b, 20000, 4);
    for (const auto& t : th) REQUIRE(b.contains(t));
    const auto a = component(th, 0);
    const double mid = 0.5 * (b.lower[0] + b.upper[0]);
    CHECK(std::abs(test::mean_of(a) - mid) < 0.01 * (b.upper[0] - b.lower[0]));
    CHECK(test::var_of(a) < (b.upper[0] - b.lower[0]) * (b.upper[0] - b.lower[0]) / 12.0);

    ThetaVector far = b.midpoint();
    far[1] = b.upper[1] + 100.0;
    ThetaVector tiny = b.width();
    for (double& v : tiny) v *= 0.01;
    p.mean = far;
    p.std = tiny;
    try {
      sample_thetas(p, b, 10, 5);
      FAIL("expected mis_specified_prior");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::mis_specified_prior);
    }
  }

  TEST_CASE("ensemble mcmc inside the box with plausible acceptance") {
    const ParamBounds b = default_sampling_box();
    const McmcResult r = ensemble_mcmc_sample(b, 32, 10200, 200, 3);
    CHECK(r.samples.size() == 32 * 10000);
    for (const auto& t : r.samples) REQUIRE(b.contains(t));
    CHECK(r.acceptance_rate > 0.2);
    CHECK(r.acceptance_rate < 0.8);
    for (std::size_t c = 0; c < kThetaDim; ++c) {
      const double tau = test::ensemble_autocorr_time(component(r.samples, c), 32);
      const double ess = static_cast<double>(r.samples.size()) / tau;
      const double mid = 0.5 * (b.lower[c] + b.upper[c]);
      const double range = b.upper[c] - b.lower[c];
      CHECK(std::abs(test::mean_of(component(r.samples, c)) - mid) < 3.0 * range / std::sqrt(12.0 * ess));
    }
  }

  TEST_CASE("ensemble mcmc preconditions") {
    const ParamBounds b = default_sampling_box();
    CHECK_THROWS_AS(ensemble_mcmc_sample(b, 8, 100, 10, 1), Error);
    CHECK_THROWS_AS(ensemble_mcmc_sample(b, 16, 100, 100, 1), Error);
    CHECK(ensemble_mcmc_sample(b, 16, 300, 100, 9).samples == ensemble_mcmc_sample(b, 16, 300, 100, 9).samples);
  }

  TEST_CASE("stretch move in one dimension") {
    const std::vector<double> lo{0.0}, hi{1.0};
    StretchMoveOptions opt;
    opt.walkers = 32;
    opt.steps = 4000;
    opt.burn_in = 200;
    const EnsembleRun run = stretch_move_box(lo, hi, opt, 12);
    CHECK(run.count() == 32 * 3800);
    CHECK(run.acceptance_rate > 0.5);
    for (double v : run.flat) REQUIRE((v >= 0.0 && v <= 1.0));
    CHECK(test::ks_uniform(run.flat, 0.0, 1.0) < 0.02);
  }

  TEST_CASE("bootstrap delta t") {
    const std::vector<double> one{0.2};
    CHECK(bootstrap_delta_t(one, 5, 1) == std::vector<double>(5, 0.2));
    const std::vector<double> three{0.18, 0.20, 0.22};
    const auto draws = bootstrap_delta_t(three, 100000, 2);
    const std::set<double> allowed(three.begin(), three.end());
    for (double v : draws) REQUIRE(allowed.count(v) == 1);
    CHECK(std::abs(test::mean_of(draws) - 0.20) < 0.001);
    CHECK_THROWS_AS(bootstrap_delta_t(std::vector<double>{}, 5, 1), Error);
  }
}
