#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "fpcg/analysis.hpp"
#include "fpcg/heart_source.hpp"
#include "fpcg/sampler.hpp"

namespace fpcg {

enum class FitDomain { waveform, envelope };

struct FitOptions {
  FitDomain domain = FitDomain::waveform;
  int max_iterations = 500;
  double rel_cost_tol = 1e-8;
  double step_tol = 1e-10;
  double decay_multiple = 8.0;   // event support, as in render_event
  bool delta_t_grid = true;      // coarse search over dT before the local fit
  double grid_half_width = 0.03; // s; at least this, or 15% of the initial dT
};

struct FitResult {
  CycleTheta theta;
  double residual_rms = 0.0;
  bool converged = false;
  int iterations = 0;
  std::size_t cycle_index = 0;
};

/// Noiseless two-event model on an n-sample grid: S1 at t = 0, S2 at t = dT
/// (continuous). Waveform domain uses the full kernels, envelope domain the
/// envelopes A a(t) only.
std::vector<double> cycle_model(const CycleTheta& theta, const EventPair& events, double fs, std::size_t n,
                                FitDomain domain = FitDomain::waveform, double decay_multiple = 8.0);

/// Projected Levenberg-Marquardt on sum (cycle - model)^2 inside `bounds`.
/// Throws ErrorKind::parameter_domain when init lies outside bounds. Running
/// out of iterations is reported through `converged`, never thrown.
FitResult fit_cycle(const Signal& cycle, const CycleTheta& init, const ParamBounds& bounds, const EventPair& events,
                    const FitOptions& opt = {});

/// Analytic Jacobian of cycle_model, row-major n x 5 (exposed for testing).
std::vector<double> cycle_model_jacobian(const CycleTheta& theta, const EventPair& events, double fs, std::size_t n,
                                         FitDomain domain = FitDomain::waveform, double decay_multiple = 8.0);

using ThetaMatrix = std::array<ThetaVector, kThetaDim>;

struct ParamSummary {
  ThetaVector mean{};
  ThetaMatrix covariance{};
  ParamBounds box;
  std::size_t n_cycles = 0;
};

struct SummaryOptions {
  double dispersion_mult = 2.0;
  double min_width_frac = 0.01;  // of the global range, per component
  std::size_t min_fits = 5;
};

/// Mean and sample covariance over converged fits; box = mean +/- mult * std
/// clipped to `global`, re-expanded to the minimum width. Throws
/// ErrorKind::insufficient_data with fewer than min_fits converged fits.
ParamSummary summarize_parameters(std::span<const FitResult> fits, const ParamBounds& global,
                                  const SummaryOptions& opt = {});

struct Histogram {
  std::vector<double> edges;    // bins + 1
  std::vector<double> density;  // integrates to 1 over the edges
};

struct Grid2D {
  std::size_t i = 0, j = 0;  // parameter indices, i < j
  std::vector<double> x_edges, y_edges;
  std::vector<double> density;  // row-major, x bins outer
};

struct CornerData {
  std::vector<ThetaVector> samples;
  std::array<Histogram, kThetaDim> marginals;
  std::vector<Grid2D> pairs;  // all i < j
};

/// Draws from N(mean, covariance) with eigenvalues floored at 1e-12 trace.
CornerData gaussian_corner_samples(const ParamSummary& summary, std::size_t n, std::uint64_t seed,
                                   std::size_t bins = 30);

struct DeltaTOptions {
  double min_separation = 0.08;     // s between the two peaks
  double min_relative_height = 0.1; // second peak vs first, above the cycle minimum
  double edge_guard = 0.125;        // s; cycles starting this close to the record start are skipped
};

/// S1-S2 peak distance of each cycle envelope: two largest local maxima,
/// earlier one is S1, parabolic refinement. Cycles without a second peak are
/// skipped, as are cycles inside the filter edge region at the record start.
/// Throws ErrorKind::insufficient_data when nothing is usable.
std::vector<double> measure_delta_t(const CycleSet& cycles, const DeltaTOptions& opt = {});

/// Starting point for a real cycle: amplitudes from Hilbert-envelope peaks,
/// decay from the 1/e fall time after each peak, dT given or from the
/// envelope. Clamped into bounds.
CycleTheta initial_guess(const Signal& cycle, const EventPair& events, const ParamBounds& bounds,
                         std::optional<double> delta_t = std::nullopt);

struct CalibrationOptions {
  PreprocConfig preproc;
  EventPair events;
  FitOptions fit;
  SummaryOptions summary;
  ParamBounds bounds = global_physiologic_bounds();
  double max_alignment = 0.03;  // s, S1 lead searched before each fit
  std::size_t corner_samples = 10000;
  std::size_t corner_bins = 30;
  std::uint64_t seed = 0;
};

struct CalibrationResult {
  Analysis analysis;
  std::vector<double> delta_t_measured;
  std::vector<FitResult> fits;
  ParamSummary summary;
  CornerData corner;
};

/// analyze -> waveform cycles -> per-cycle alignment, init and fit ->
/// summary -> corner data. Errors carry the stage that failed.
CalibrationResult calibrate_recording(const Signal& x, const CalibrationOptions& opt = {});

}  // namespace fpcg
