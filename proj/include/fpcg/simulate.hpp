#pragma once

#include <cstdint>
#include <vector>

#include "fpcg/config.hpp"

namespace fpcg {

struct GroundTruth {
  std::vector<CycleTheta> thetas;  // as rendered (shared tau and dT bootstrap applied)
  RRSeries rr;
  std::vector<double> onset_times;          // s, prefix sums of rr
  std::vector<std::size_t> onset_samples;   // rendered cycle starts
  std::vector<double> s2_times;             // s, S2 onset after time stretching
  std::vector<double> maternal_onsets;      // s
  std::vector<ArtifactEvent> movement_events;
  std::vector<Contraction> contractions;
};

/// One synthesized recording with every additive term kept separately:
/// mixture = cardiac_propagated * (1 - uc_envelope) + noise + movement + uc_noise.
struct Recording {
  Signal mixture;
  Signal fetal_clean;
  Signal maternal_clean;
  Signal cardiac_propagated;
  Signal uc_envelope;
  Signal noise;
  Signal movement;
  Signal uc_noise;
  double sigma_n = 0.0;
  GroundTruth truth;
  SimConfig config;
  std::uint64_t seed = 0;
};

/// Full pipeline for cycles_per_sample fetal cycles. Errors are re-thrown
/// with the failing stage ("config", "sampler", "heart-source",
/// "transmission", "artifacts", "noise").
Recording simulate(const SimConfig& cfg, std::uint64_t seed);
inline Recording simulate(const SimConfig& cfg) { return simulate(cfg, cfg.seed); }

/// Seed of recording `index` in a batch started from `seed`.
std::uint64_t batch_seed(std::uint64_t seed, std::size_t index);

}  // namespace fpcg
