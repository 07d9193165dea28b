// fpcg command-line front end: simulate, calibrate, validate, presets, serve.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "fpcg/api.hpp"
#include "fpcg/calibration.hpp"
#include "fpcg/config.hpp"
#include "fpcg/error.hpp"
#include "fpcg/io.hpp"
#include "fpcg/simulate.hpp"

namespace fs = std::filesystem;
using namespace fpcg;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorKind::io, "cannot open " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct SimulateArgs {
  std::string config, preset, out, format = "wav";
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<int> num_samples;
  bool strict = false, pcm16 = false, components = false;
};

int run_simulate(const SimulateArgs& a) {
  LoadOptions lo{a.strict};
  SimConfig cfg;
  std::string text;
  if (!a.preset.empty()) text += "preset = " + a.preset + "\n";
  if (!a.config.empty()) text += read_file(a.config);
  cfg = load_config(text, lo);
  for (const auto& kv : a.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::config, "--set expects key=value, got '" + kv + "'");
    apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1), a.strict);
  }
  if (a.seed) cfg.seed = *a.seed;
  if (a.num_samples) cfg.num_samples = *a.num_samples;
  validate(cfg);

  ExportOptions ex;
  ex.wav = a.format == "wav" || a.format == "both";
  ex.csv = a.format == "csv" || a.format == "both";
  ex.components = a.components;
  ex.encoding = a.pcm16 ? WavEncoding::pcm16 : WavEncoding::float32;

  const fs::path out(a.out);
  fs::create_directories(out);
  write_text(out / "config.ini", serialize_config(cfg));
  for (int i = 0; i < cfg.num_samples; ++i) {
    const auto seed = batch_seed(cfg.seed, static_cast<std::size_t>(i));
    const Recording rec = simulate(cfg, seed);
    char stem[32];
    std::snprintf(stem, sizeof stem, "fpcg_%03d", i);
    export_recording(rec, out, stem, ex);
    std::printf("%s  %zu samples  %.2f s  seed %llu\n", stem, rec.mixture.size(), rec.mixture.duration(),
                static_cast<unsigned long long>(seed));
  }
  return 0;
}

struct CalibrateArgs {
  std::string input, out, corner_dir, ini;
  std::optional<double> fs_hint, resample_fs;
  std::uint64_t seed = 0;
  bool envelope = false;
};

int run_calibrate(const CalibrateArgs& a) {
  const Signal x = ingest_recording(a.input, a.fs_hint, a.resample_fs);
  CalibrationOptions opt;
  opt.seed = a.seed;
  if (a.envelope) opt.fit.domain = FitDomain::envelope;
  const CalibrationResult res = calibrate_recording(x, opt);
  write_text(a.out, to_json(res).dump(2) + "\n");
  if (!a.corner_dir.empty()) write_corner_csv(a.corner_dir, res.corner);
  if (!a.ini.empty()) {
    std::ostringstream os;
    SimConfig cfg;
    cfg.box = res.summary.box;
    cfg.delta_t_measured = res.delta_t_measured;
    os << "# fitted from " << fs::path(a.input).filename().string() << "\n[sampler]\n";
    for (const char* key : {"box_lower", "box_upper", "delta_t_measured"}) {
      os << key << " = " << find_param(key)->get(cfg) << "\n";
    }
    write_text(a.ini, os.str());
  }
  std::size_t conv = 0;
  for (const auto& f : res.fits) conv += f.converged ? 1 : 0;
  std::printf("T0 %.4f s  cycles %zu  converged %zu\n", res.analysis.t0, res.fits.size(), conv);
  return 0;
}

struct ValidateArgs {
  std::string real, sim, out, csv_dir;
  std::optional<double> fs_hint;
};

int run_validate(const ValidateArgs& a) {
  const Signal real = ingest_recording(a.real, a.fs_hint);
  const Signal sim = ingest_recording(a.sim, a.fs_hint);
  const CompareReport rep = compare_stats(real, sim, PreprocConfig{});
  write_text(a.out, to_json(rep).dump(2) + "\n");
  if (!a.csv_dir.empty()) {
    const fs::path d(a.csv_dir);
    fs::create_directories(d);
    write_curve_csv(d / "acf_real.csv", rep.real.acf, "lag", "value");
    write_curve_csv(d / "acf_sim.csv", rep.sim.acf, "lag", "value");
    write_curve_csv(d / "psd_real.csv", rep.real.psd, "freq", "db");
    write_curve_csv(d / "psd_sim.csv", rep.sim.psd, "freq", "db");
  }
  std::printf("acf_rmse %.6f  psd_rmse_db %.4f  envelope_corr %.4f\n", rep.acf_rmse, rep.psd_rmse_db, rep.envelope_corr);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parametric fetal phonocardiogram simulator"};
  app.require_subcommand(1);

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "Synthesize recordings");
  sim->add_option("--config", sa.config, "INI configuration file")->check(CLI::ExistingFile);
  sim->add_option("--preset", sa.preset, "Preset to start from");
  sim->add_option("--seed", sa.seed, "Master seed (default: from config)");
  sim->add_option("--out", sa.out, "Output directory")->required();
  sim->add_option("--set", sa.sets, "Override key=value (repeatable)");
  sim->add_option("--num-samples", sa.num_samples, "Recordings to generate")->check(CLI::PositiveNumber);
  sim->add_option("--format", sa.format, "wav, csv or both")->check(CLI::IsMember({"wav", "csv", "both"}));
  sim->add_flag("--pcm16", sa.pcm16, "16-bit PCM instead of float32 WAV");
  sim->add_flag("--components", sa.components, "Also write one WAV per component");
  sim->add_flag("--strict", sa.strict, "Out-of-range values are errors");

  CalibrateArgs ca;
  auto* cal = app.add_subcommand("calibrate", "Fit per-cycle parameters to a recording");
  cal->add_option("--input", ca.input, "WAV or CSV recording")->required()->check(CLI::ExistingFile);
  cal->add_option("--out", ca.out, "Summary JSON")->required();
  cal->add_option("--fs-hint", ca.fs_hint, "Sample rate for headerless CSV");
  cal->add_option("--resample", ca.resample_fs, "Resample to this rate first");
  cal->add_option("--seed", ca.seed, "Seed for corner samples");
  cal->add_option("--corner-csv", ca.corner_dir, "Directory for corner-plot CSV grids");
  cal->add_option("--ini", ca.ini, "Write the fitted sampling box as an INI fragment");
  cal->add_flag("--envelope", ca.envelope, "Fit envelopes instead of waveforms");

  ValidateArgs va;
  auto* val = app.add_subcommand("validate", "Compare a real and a simulated recording");
  val->add_option("--real", va.real, "Reference recording")->required()->check(CLI::ExistingFile);
  val->add_option("--sim", va.sim, "Simulated recording")->required()->check(CLI::ExistingFile);
  val->add_option("--out", va.out, "Report JSON")->required();
  val->add_option("--fs-hint", va.fs_hint, "Sample rate for headerless CSV");
  val->add_option("--csv", va.csv_dir, "Directory for ACF/PSD curve CSVs");

  auto* pre = app.add_subcommand("presets", "List or show presets");
  pre->require_subcommand(1);
  auto* pre_list = pre->add_subcommand("list", "Preset names and descriptions");
  std::string show_name;
  bool show_full = false;
  auto* pre_show = pre->add_subcommand("show", "Print a preset");
  pre_show->add_option("name", show_name, "Preset name")->required();
  pre_show->add_flag("--full", show_full, "Print the complete resulting configuration");

  std::string host = "127.0.0.1";
  int port = 8080;
  double max_seconds = 60.0;
  auto* srv = app.add_subcommand("serve", "HTTP JSON synthesis API");
  srv->add_option("--port", port, "Port")->check(CLI::Range(1, 65535));
  srv->add_option("--host", host, "Bind address");
  srv->add_option("--max-seconds", max_seconds, "Cap on returned array duration")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sim) return run_simulate(sa);
    if (*cal) return run_calibrate(ca);
    if (*val) return run_validate(va);
    if (*pre_list) {
      for (const auto& p : presets()) std::printf("%-18s %s\n", p.name.c_str(), p.description.c_str());
      return 0;
    }
    if (*pre_show) {
      const Preset& p = find_preset(show_name);
      std::cout << (show_full ? serialize_config(preset_config(p.name)) : p.text);
      return 0;
    }
    if (*srv) {
      std::printf("listening on http://%s:%d\n", host.c_str(), port);
      std::fflush(stdout);
      serve(host, port, ApiOptions{max_seconds});
      return 0;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n", std::string(to_string(e.kind())).c_str(), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
