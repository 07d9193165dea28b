#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fpcg {

enum class ErrorKind {
  parameter_domain,   // argument outside its mathematical domain
  aliasing,           // sample rate too low for a carrier
  cycle_geometry,     // S2 would land outside its cycle
  config,             // invalid or malformed configuration
  degenerate,         // zero-energy / singular configuration
  truncation,         // response horizon too short
  instability,        // |rho| >= 1 and similar
  snr_undefined,      // silent reference signal
  mis_specified_prior,
  diagnostics,        // sampler got stuck
  band_infeasible,
  no_periodicity,
  segmentation,
  insufficient_data,
  io,
  unsupported_format,
};

std::string_view to_string(ErrorKind kind);

/// Library-wide exception. `stage` names the pipeline stage that failed
/// ("heart-source", "transmission", "real", ...) and is empty when the error
/// comes from a direct call.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::string stage = {})
      : std::runtime_error(message), kind_(kind), stage_(std::move(stage)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& stage() const noexcept { return stage_; }

  /// Copy of this error re-attributed to `stage`; the message is prefixed.
  Error with_stage(const std::string& stage) const {
    return Error(kind_, stage + ": " + what(), stage);
  }

 private:
  ErrorKind kind_;
  std::string stage_;
};

}  // namespace fpcg
