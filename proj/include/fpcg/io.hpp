#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fpcg/analysis.hpp"
#include "fpcg/calibration.hpp"
#include "fpcg/simulate.hpp"

namespace fpcg {

enum class WavEncoding { float32, pcm16 };

/// Mono WAV. PCM16 clips to [-1, 1].
void write_wav(const std::filesystem::path& path, const Signal& x, WavEncoding enc = WavEncoding::float32);

/// Reads PCM 8/16/24/32-bit or float 32/64 WAV (plain or extensible). Takes
/// the first channel of multichannel files.
Signal read_wav(const std::filesystem::path& path);

/// Header "time,mixture,<components...>" then one row per sample.
void write_csv(const std::filesystem::path& path, const Recording& rec);

struct ExportOptions {
  bool wav = true;
  bool csv = false;
  bool components = false;  // one extra WAV per component
  WavEncoding encoding = WavEncoding::float32;
};

/// Writes <stem>.wav / <stem>.csv / <stem>_<component>.wav and always the
/// <stem>.json sidecar. Returns the created paths.
std::vector<std::filesystem::path> export_recording(const Recording& rec, const std::filesystem::path& dir,
                                                    const std::string& stem, const ExportOptions& opt = {});

/// Annotations, seed, sigma_n and the configuration of a recording.
nlohmann::json sidecar_json(const Recording& rec);

/// WAV, or CSV with one value column (optionally preceded by a time column)
/// and an optional "# fs=<Hz>" comment. fs comes from the file, the time
/// column, or fs_hint, in that order. Resampled when target_fs is set.
/// Throws ErrorKind::unsupported_format / ErrorKind::io.
Signal ingest_recording(const std::filesystem::path& path, std::optional<double> fs_hint = std::nullopt,
                        std::optional<double> target_fs = std::nullopt);

nlohmann::json to_json(const CycleTheta& theta);
nlohmann::json to_json(const ParamBounds& bounds);
nlohmann::json to_json(const Curve& curve, const char* x_name, const char* y_name);
nlohmann::json to_json(const CompareReport& report);
nlohmann::json to_json(const FitResult& fit);
nlohmann::json to_json(const ParamSummary& summary);
nlohmann::json to_json(const CornerData& corner);
nlohmann::json to_json(const CalibrationResult& result);

/// Two-column CSV "x,y[,spread]".
void write_curve_csv(const std::filesystem::path& path, const Curve& curve, const std::string& x_name,
                     const std::string& y_name);

/// Corner data: samples.csv, marginal_<name>.csv, pair_<a>_<b>.csv in dir.
std::vector<std::filesystem::path> write_corner_csv(const std::filesystem::path& dir, const CornerData& corner);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace fpcg
