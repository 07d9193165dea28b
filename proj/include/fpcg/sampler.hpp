#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fpcg/heart_source.hpp"

namespace fpcg {

/// Axis-aligned box over the cycle parameter vector.
struct ParamBounds {
  ThetaVector lower{};
  ThetaVector upper{};

  ThetaVector midpoint() const;
  ThetaVector width() const;
  bool contains(const CycleTheta& theta) const;
  friend bool operator==(const ParamBounds&, const ParamBounds&) = default;
};

/// Throws ErrorKind::config unless lower < upper componentwise (all finite).
void validate(const ParamBounds& b);

/// Outer limits every box (fitted or configured) is clipped to.
ParamBounds global_physiologic_bounds();

/// Default per-cycle sampling box at 140 bpm.
ParamBounds default_sampling_box();

enum class PriorKind { uniform, truncated_gaussian, ensemble_mcmc };

std::string to_string(PriorKind kind);
PriorKind parse_prior_kind(const std::string& text);

struct PriorSpec {
  PriorKind kind = PriorKind::uniform;
  std::optional<ThetaVector> mean;  // truncated Gaussian; default box midpoint
  std::optional<ThetaVector> std;   // truncated Gaussian; default width / 4
  std::size_t walkers = 32;         // ensemble MCMC
  std::size_t burn_in = 200;
  std::size_t thin = 1;
  double stretch_scale = 2.0;

  friend bool operator==(const PriorSpec&, const PriorSpec&) = default;
};

/// n vectors inside `bounds`. Uniform: independent uniform components.
/// Truncated Gaussian: independent N(mean, std^2) per component, rejection
/// within the box; throws ErrorKind::mis_specified_prior when a component's
/// acceptance falls below 0.1%. Ensemble MCMC: first n post-burn-in samples of
/// ensemble_mcmc_sample. Deterministic given seed.
std::vector<CycleTheta> sample_thetas(const PriorSpec& prior, const ParamBounds& bounds, std::size_t n,
                                      std::uint64_t seed);

struct StretchMoveOptions {
  std::size_t walkers = 32;
  std::size_t steps = 1000;
  std::size_t burn_in = 200;
  std::size_t thin = 1;
  double a = 2.0;
  std::size_t stuck_window = 100;  // steps with zero acceptance before giving up
};

/// Flattened chain: sample i occupies [i * dim, (i + 1) * dim). Samples are
/// ordered by step, then walker.
struct EnsembleRun {
  std::size_t dim = 0;
  std::size_t walkers = 0;
  std::vector<double> flat;
  double acceptance_rate = 0.0;

  std::size_t count() const { return dim ? flat.size() / dim : 0; }
  std::span<const double> sample(std::size_t i) const { return {flat.data() + i * dim, dim}; }
};

/// Goodman-Weare stretch move targeting the uniform density on a box of any
/// dimension. z ~ g(z) ∝ 1/sqrt(z) on [1/a, a]; proposal x_j + z (x_k - x_j)
/// against a random other walker; accepted with prob min(1, z^(dim-1)) when it
/// stays inside the box, rejected otherwise. Walkers start uniform in the box
/// and are updated one at a time.
EnsembleRun stretch_move_box(std::span<const double> lower, std::span<const double> upper,
                             const StretchMoveOptions& opt, std::uint64_t seed);

struct McmcResult {
  std::vector<CycleTheta> samples;
  double acceptance_rate = 0.0;
};

/// Five-dimensional stretch-move run over `bounds`; requires walkers >= 10 and
/// steps > burn_in. Throws ErrorKind::diagnostics when no walker moves for 100
/// consecutive steps.
McmcResult ensemble_mcmc_sample(const ParamBounds& bounds, std::size_t walkers, std::size_t steps,
                                std::size_t burn_in, std::uint64_t seed);

/// n draws with replacement from `measured`.
std::vector<double> bootstrap_delta_t(std::span<const double> measured, std::size_t n, std::uint64_t seed);

}  // namespace fpcg
