#include "fpcg/sampler.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "fpcg/error.hpp"
#include "fpcg/seed.hpp"

namespace fpcg {

ThetaVector ParamBounds::midpoint() const {
  ThetaVector m{};
  for (std::size_t i = 0; i < kThetaDim; ++i) m[i] = 0.5 * (lower[i] + upper[i]);
  return m;
}

ThetaVector ParamBounds::width() const {
  ThetaVector w{};
  for (std::size_t i = 0; i < kThetaDim; ++i) w[i] = upper[i] - lower[i];
  return w;
}

bool ParamBounds::contains(const CycleTheta& theta) const {
  const auto v = theta.to_array();
  for (std::size_t i = 0; i < kThetaDim; ++i) {
    if (v[i] < lower[i] || v[i] > upper[i]) return false;
  }
  return true;
}

void validate(const ParamBounds& b) {
  for (std::size_t i = 0; i < kThetaDim; ++i) {
    if (!std::isfinite(b.lower[i]) || !std::isfinite(b.upper[i]) || !(b.lower[i] < b.upper[i])) {
      std::ostringstream os;
      os << "bounds for " << theta_names()[i] << " must satisfy lower < upper, got [" << b.lower[i] << ", "
         << b.upper[i] << "]";
      throw Error(ErrorKind::config, os.str());
    }
  }
}

ParamBounds global_physiologic_bounds() {
  return {{0.01, 0.01, 0.004, 0.004, 0.10}, {5.0, 5.0, 0.10, 0.10, 0.40}};
}

ParamBounds default_sampling_box() {
  return {{0.9, 0.4, 0.015, 0.015, 0.19}, {1.3, 0.8, 0.030, 0.030, 0.23}};
}

std::string to_string(PriorKind kind) {
  switch (kind) {
    case PriorKind::uniform: return "uniform";
    case PriorKind::truncated_gaussian: return "truncated_gaussian";
    case PriorKind::ensemble_mcmc: return "ensemble_mcmc";
  }
  return "uniform";
}

PriorKind parse_prior_kind(const std::string& text) {
  if (text == "uniform") return PriorKind::uniform;
  if (text == "truncated_gaussian") return PriorKind::truncated_gaussian;
  if (text == "ensemble_mcmc") return PriorKind::ensemble_mcmc;
  throw Error(ErrorKind::config,
              "unknown prior kind '" + text + "' (expected uniform, truncated_gaussian or ensemble_mcmc)");
}

namespace {

std::vector<CycleTheta> sample_uniform(const ParamBounds& b, std::size_t n, Rng& rng) {
  std::vector<CycleTheta> out(n);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& theta : out) {
    ThetaVector v{};
    for (std::size_t i = 0; i < kThetaDim; ++i) v[i] = b.lower[i] + u(rng) * (b.upper[i] - b.lower[i]);
    theta = CycleTheta::from_array(v);
  }
  return out;
}

std::vector<CycleTheta> sample_truncated_gaussian(const PriorSpec& prior, const ParamBounds& b, std::size_t n,
                                                  Rng& rng) {
  const ThetaVector mean = prior.mean.value_or(b.midpoint());
  ThetaVector sd{};
  if (prior.std) {
    sd = *prior.std;
  } else {
    const auto w = b.width();
    for (std::size_t i = 0; i < kThetaDim; ++i) sd[i] = w[i] / 4.0;
  }
  for (std::size_t i = 0; i < kThetaDim; ++i) {
    if (!(sd[i] > 0.0) || !std::isfinite(mean[i])) {
      throw Error(ErrorKind::config, "truncated Gaussian prior needs finite mean and std > 0 for " + theta_names()[i]);
    }
  }
  constexpr double kMinAcceptance = 1e-3;
  constexpr std::size_t kMinAttempts = 10000;
  std::normal_distribution<double> normal(0.0, 1.0);
  std::array<std::size_t, kThetaDim> attempts{}, accepted{};
  std::vector<CycleTheta> out(n);
  for (auto& theta : out) {
    ThetaVector v{};
    for (std::size_t i = 0; i < kThetaDim; ++i) {
      for (;;) {
        const double x = mean[i] + sd[i] * normal(rng);
        ++attempts[i];
        if (x >= b.lower[i] && x <= b.upper[i]) {
          ++accepted[i];
          v[i] = x;
          break;
        }
        if (attempts[i] >= kMinAttempts &&
            static_cast<double>(accepted[i]) < kMinAcceptance * static_cast<double>(attempts[i])) {
          std::ostringstream os;
          os << "truncated Gaussian for " << theta_names()[i] << " accepts " << accepted[i] << " of "
             << attempts[i] << " draws inside the box (< 0.1%); mean/std do not match the bounds";
          throw Error(ErrorKind::mis_specified_prior, os.str());
        }
      }
    }
    theta = CycleTheta::from_array(v);
  }
  return out;
}

}  // namespace

EnsembleRun stretch_move_box(std::span<const double> lower, std::span<const double> upper,
                             const StretchMoveOptions& opt, std::uint64_t seed) {
  const std::size_t dim = lower.size();
  if (dim == 0 || upper.size() != dim) throw Error(ErrorKind::parameter_domain, "stretch_move_box: bad box");
  for (std::size_t i = 0; i < dim; ++i) {
    if (!(lower[i] < upper[i])) throw Error(ErrorKind::parameter_domain, "stretch_move_box: lower must be < upper");
  }
  if (opt.walkers < 2 * dim || opt.walkers < 3) {
    throw Error(ErrorKind::parameter_domain, "stretch_move_box: need walkers >= max(2 * dim, 3)");
  }
  if (opt.steps <= opt.burn_in) throw Error(ErrorKind::parameter_domain, "stretch_move_box: steps must exceed burn_in");
  if (!(opt.a > 1.0)) throw Error(ErrorKind::parameter_domain, "stretch_move_box: scale a must be > 1");
  const std::size_t thin = std::max<std::size_t>(opt.thin, 1);

  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t W = opt.walkers;
  std::vector<double> pos(W * dim);
  for (std::size_t k = 0; k < W; ++k) {
    for (std::size_t i = 0; i < dim; ++i) pos[k * dim + i] = lower[i] + unit(rng) * (upper[i] - lower[i]);
  }

  EnsembleRun run;
  run.dim = dim;
  run.walkers = W;
  run.flat.reserve(((opt.steps - opt.burn_in) / thin + 1) * W * dim);
  std::vector<double> proposal(dim);
  std::vector<std::size_t> recent(opt.stuck_window, 1);
  std::size_t total_accepted = 0, total_proposed = 0;
  const double sqrt_a = std::sqrt(opt.a);
  const double exponent = static_cast<double>(dim) - 1.0;

  for (std::size_t step = 0; step < opt.steps; ++step) {
    std::size_t accepted = 0;
    for (std::size_t k = 0; k < W; ++k) {
      std::size_t j = static_cast<std::size_t>(unit(rng) * static_cast<double>(W - 1));
      if (j >= W - 1) j = W - 2;
      if (j >= k) ++j;
      // inverse CDF of g(z) ∝ 1/sqrt(z) on [1/a, a]
      const double s = (sqrt_a - 1.0 / sqrt_a) * unit(rng) + 1.0 / sqrt_a;
      const double z = s * s;
      bool inside = true;
      for (std::size_t i = 0; i < dim; ++i) {
        const double xj = pos[j * dim + i];
        proposal[i] = xj + z * (pos[k * dim + i] - xj);
        if (proposal[i] < lower[i] || proposal[i] > upper[i]) inside = false;
      }
      const double u = unit(rng);
      if (inside && u < std::pow(z, exponent)) {
        std::copy(proposal.begin(), proposal.end(), pos.begin() + static_cast<std::ptrdiff_t>(k * dim));
        ++accepted;
      }
    }
    total_accepted += accepted;
    total_proposed += W;
    if (!recent.empty()) {
      recent[step % recent.size()] = accepted;
      if (step + 1 >= recent.size()) {
        std::size_t window_sum = 0;
        for (auto v : recent) window_sum += v;
        if (window_sum == 0) {
          std::ostringstream os;
          os << "ensemble sampler stuck: no walker accepted a move in the last " << recent.size()
             << " steps (step " << step << ")";
          throw Error(ErrorKind::diagnostics, os.str());
        }
      }
    }
    if (step >= opt.burn_in && (step - opt.burn_in) % thin == 0) {
      run.flat.insert(run.flat.end(), pos.begin(), pos.end());
    }
  }
  run.acceptance_rate = total_proposed ? static_cast<double>(total_accepted) / static_cast<double>(total_proposed) : 0.0;
  return run;
}

McmcResult ensemble_mcmc_sample(const ParamBounds& bounds, std::size_t walkers, std::size_t steps,
                                std::size_t burn_in, std::uint64_t seed) {
  validate(bounds);
  if (walkers < 2 * kThetaDim) throw Error(ErrorKind::config, "ensemble MCMC needs walkers >= 10");
  StretchMoveOptions opt;
  opt.walkers = walkers;
  opt.steps = steps;
  opt.burn_in = burn_in;
  const auto run = stretch_move_box(bounds.lower, bounds.upper, opt, seed);
  McmcResult out;
  out.acceptance_rate = run.acceptance_rate;
  out.samples.reserve(run.count());
  for (std::size_t i = 0; i < run.count(); ++i) {
    const auto s = run.sample(i);
    out.samples.push_back({s[0], s[1], s[2], s[3], s[4]});
  }
  return out;
}

std::vector<CycleTheta> sample_thetas(const PriorSpec& prior, const ParamBounds& bounds, std::size_t n,
                                      std::uint64_t seed) {
  validate(bounds);
  if (n == 0) throw Error(ErrorKind::parameter_domain, "sample_thetas: n must be >= 1");
  Rng rng(seed);
  switch (prior.kind) {
    case PriorKind::uniform:
      return sample_uniform(bounds, n, rng);
    case PriorKind::truncated_gaussian:
      return sample_truncated_gaussian(prior, bounds, n, rng);
    case PriorKind::ensemble_mcmc: {
      if (prior.walkers < 2 * kThetaDim) throw Error(ErrorKind::config, "ensemble MCMC needs walkers >= 10");
      StretchMoveOptions opt;
      opt.walkers = prior.walkers;
      opt.burn_in = prior.burn_in;
      opt.thin = std::max<std::size_t>(prior.thin, 1);
      opt.a = prior.stretch_scale;
      const std::size_t per_step = prior.walkers;
      opt.steps = prior.burn_in + ((n + per_step - 1) / per_step) * opt.thin + 1;
      const auto run = stretch_move_box(bounds.lower, bounds.upper, opt, seed);
      std::vector<CycleTheta> out;
      out.reserve(n);
      for (std::size_t i = 0; i < n; ++i) {
        const auto s = run.sample(i);
        out.push_back({s[0], s[1], s[2], s[3], s[4]});
      }
      return out;
    }
  }
  throw Error(ErrorKind::config, "unknown prior kind");
}

std::vector<double> bootstrap_delta_t(std::span<const double> measured, std::size_t n, std::uint64_t seed) {
  if (measured.empty()) throw Error(ErrorKind::insufficient_data, "bootstrap_delta_t: no measured intervals");
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, measured.size() - 1);
  std::vector<double> out(n);
  for (double& v : out) v = measured[pick(rng)];
  return out;
}

}  // namespace fpcg
