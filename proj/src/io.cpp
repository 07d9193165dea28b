#include "fpcg/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "fpcg/error.hpp"
#include "fpcg/log.hpp"
#include "fpcg/resample.hpp"

namespace fpcg {

using nlohmann::json;

namespace {

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);  // little-endian host assumed
}

template <typename T>
T get_le(const std::vector<char>& buf, std::size_t at) {
  T v;
  std::memcpy(&v, buf.data() + at, sizeof v);
  return v;
}

std::string num(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(ErrorKind::io, "write failed: " + path.string());
}

std::vector<std::pair<std::string, const Signal*>> components(const Recording& rec) {
  return {{"fetal_clean", &rec.fetal_clean},     {"maternal_clean", &rec.maternal_clean},
          {"cardiac_propagated", &rec.cardiac_propagated}, {"uc_envelope", &rec.uc_envelope},
          {"noise", &rec.noise},                 {"movement", &rec.movement},
          {"uc_noise", &rec.uc_noise}};
}

bool parse_number(std::string_view s, double& v) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && p == s.data() + s.size();
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  const bool has_sep = line.find_first_of(",;\t") != std::string::npos;
  if (!has_sep) {
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
  }
  for (char c : line) {
    if (c == ',' || c == ';' || c == '\t') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

Signal read_csv(const std::filesystem::path& path, std::optional<double> fs_hint) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  std::optional<double> fs_header;
  std::vector<std::string> names;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (line.front() == '#') {
      auto pos = line.find("fs");
      if (pos != std::string::npos) {
        pos = line.find_first_of("=:", pos);
        double v = 0.0;
        if (pos != std::string::npos && parse_number(line.substr(pos + 1), v) && v > 0.0) fs_header = v;
      }
      continue;
    }
    const auto fields = split_fields(line);
    std::vector<double> vals;
    bool numeric = true;
    for (const auto& f : fields) {
      double v = 0.0;
      if (!parse_number(f, v)) {
        numeric = false;
        break;
      }
      vals.push_back(v);
    }
    if (!numeric) {
      if (rows.empty() && names.empty()) {
        for (auto f : fields) {
          f.erase(0, f.find_first_not_of(" \t\""));
          f.erase(f.find_last_not_of(" \t\"") + 1);
          std::transform(f.begin(), f.end(), f.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
          names.push_back(f);
        }
        continue;
      }
      throw Error(ErrorKind::unsupported_format, path.string() + ":" + std::to_string(lineno) + ": non-numeric row");
    }
    if (!rows.empty() && vals.size() != rows.front().size()) {
      throw Error(ErrorKind::unsupported_format, path.string() + ":" + std::to_string(lineno) + ": ragged row");
    }
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw Error(ErrorKind::unsupported_format, path.string() + ": no samples");
  const std::size_t cols = rows.front().size();
  std::optional<std::size_t> time_col;
  std::size_t value_col = 0;
  if (cols >= 2) {
    time_col = 0;
    value_col = 1;
    if (!names.empty()) {
      const auto t = std::find_if(names.begin(), names.end(), [](const std::string& s) { return s == "time" || s == "t"; });
      time_col = t == names.end() ? std::nullopt : std::optional<std::size_t>(static_cast<std::size_t>(t - names.begin()));
      const auto m = std::find(names.begin(), names.end(), "mixture");
      if (m != names.end()) {
        value_col = static_cast<std::size_t>(m - names.begin());
      } else {
        value_col = time_col && *time_col == 0 ? 1 : 0;
      }
    }
  }
  Signal s;
  s.samples.reserve(rows.size());
  for (const auto& r : rows) s.samples.push_back(r[value_col]);
  if (fs_header) {
    s.fs = *fs_header;
  } else if (time_col && rows.size() >= 2) {
    const double span = rows.back()[*time_col] - rows.front()[*time_col];
    if (!(span > 0.0)) throw Error(ErrorKind::unsupported_format, path.string() + ": time column is not increasing");
    double fs = static_cast<double>(rows.size() - 1) / span;
    if (std::abs(fs - std::round(fs)) < 1e-6 * fs) fs = std::round(fs);
    s.fs = fs;
  } else if (fs_hint) {
    s.fs = *fs_hint;
  } else {
    throw Error(ErrorKind::unsupported_format, path.string() + ": sample rate unknown (no '# fs=' header, no time column, no hint)");
  }
  return s;
}

}  // namespace

void write_wav(const std::filesystem::path& path, const Signal& x, WavEncoding enc) {
  validate(x);
  const auto rate = static_cast<std::uint32_t>(std::lround(x.fs));
  if (std::abs(x.fs - rate) > 1e-9 * x.fs) warn("WAV stores an integer sample rate; " + num(x.fs) + " Hz written as " + std::to_string(rate));
  const std::uint16_t bits = enc == WavEncoding::float32 ? 32 : 16;
  const std::uint16_t format = enc == WavEncoding::float32 ? 3 : 1;
  const std::uint16_t block = bits / 8;
  const auto data_bytes = static_cast<std::uint32_t>(x.size() * block);
  auto out = open_out(path, std::ios::binary);
  out.write("RIFF", 4);
  put<std::uint32_t>(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  put<std::uint32_t>(out, 16);
  put<std::uint16_t>(out, format);
  put<std::uint16_t>(out, 1);
  put<std::uint32_t>(out, rate);
  put<std::uint32_t>(out, rate * block);
  put<std::uint16_t>(out, block);
  put<std::uint16_t>(out, bits);
  out.write("data", 4);
  put<std::uint32_t>(out, data_bytes);
  for (double v : x.samples) {
    if (enc == WavEncoding::float32) {
      put<float>(out, static_cast<float>(v));
    } else {
      put<std::int16_t>(out, static_cast<std::int16_t>(std::lround(std::clamp(v, -1.0, 1.0) * 32767.0)));
    }
  }
  finish(out, path);
}

Signal read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto fail = [&](const std::string& m) -> Signal { throw Error(ErrorKind::unsupported_format, path.string() + ": " + m); };
  if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 || std::memcmp(buf.data() + 8, "WAVE", 4) != 0) {
    return fail("not a RIFF/WAVE file");
  }
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t data_at = 0, data_len = 0;
  bool have_fmt = false;
  for (std::size_t pos = 12; pos + 8 <= buf.size();) {
    const std::string id(buf.data() + pos, 4);
    const auto len = get_le<std::uint32_t>(buf, pos + 4);
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      if (len < 16 || body + len > buf.size()) return fail("truncated fmt chunk");
      format = get_le<std::uint16_t>(buf, body);
      channels = get_le<std::uint16_t>(buf, body + 2);
      rate = get_le<std::uint32_t>(buf, body + 4);
      bits = get_le<std::uint16_t>(buf, body + 14);
      if (format == 0xFFFE && len >= 26) format = get_le<std::uint16_t>(buf, body + 24);
      have_fmt = true;
    } else if (id == "data") {
      data_at = body;
      data_len = std::min<std::size_t>(len, buf.size() - body);
      break;
    }
    pos = body + len + (len & 1u);
  }
  if (!have_fmt) return fail("missing fmt chunk");
  if (data_at == 0) return fail("missing data chunk");
  if (channels == 0 || rate == 0) return fail("invalid channel count or rate");
  const std::size_t width = bits / 8;
  const bool ok = (format == 1 && (bits == 8 || bits == 16 || bits == 24 || bits == 32)) ||
                  (format == 3 && (bits == 32 || bits == 64));
  if (!ok) return fail("unsupported encoding (format " + std::to_string(format) + ", " + std::to_string(bits) + " bit)");
  if (channels > 1) warn(path.string() + ": " + std::to_string(channels) + " channels, using the first");
  const std::size_t frame = width * channels;
  const std::size_t n = data_len / frame;
  Signal s(n, static_cast<double>(rate));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t at = data_at + i * frame;
    double v = 0.0;
    if (format == 3) {
      v = bits == 32 ? static_cast<double>(get_le<float>(buf, at)) : get_le<double>(buf, at);
    } else if (bits == 8) {
      v = (static_cast<double>(static_cast<unsigned char>(buf[at])) - 128.0) / 128.0;
    } else if (bits == 16) {
      v = get_le<std::int16_t>(buf, at) / 32768.0;
    } else if (bits == 24) {
      const std::int32_t raw = (static_cast<unsigned char>(buf[at]) | (static_cast<unsigned char>(buf[at + 1]) << 8) |
                                (static_cast<std::int32_t>(static_cast<signed char>(buf[at + 2])) << 16));
      v = raw / 8388608.0;
    } else {
      v = get_le<std::int32_t>(buf, at) / 2147483648.0;
    }
    s.samples[i] = v;
  }
  return s;
}

void write_csv(const std::filesystem::path& path, const Recording& rec) {
  auto out = open_out(path);
  const auto comps = components(rec);
  out << "time,mixture";
  for (const auto& [name, sig] : comps) out << ',' << name;
  out << '\n';
  const double fs = rec.mixture.fs;
  for (std::size_t i = 0; i < rec.mixture.size(); ++i) {
    out << num(static_cast<double>(i) / fs) << ',' << num(rec.mixture[i]);
    for (const auto& [name, sig] : comps) out << ',' << num(sig->samples[i]);
    out << '\n';
  }
  finish(out, path);
}

json to_json(const CycleTheta& t) {
  return json{{"A_S1", t.a_s1}, {"A_S2", t.a_s2}, {"tau_S1", t.tau_s1}, {"tau_S2", t.tau_s2}, {"deltaT", t.delta_t}};
}

json to_json(const ParamBounds& b) { return json{{"lower", b.lower}, {"upper", b.upper}, {"names", theta_names()}}; }

json sidecar_json(const Recording& rec) {
  const auto& t = rec.truth;
  json thetas = json::array();
  for (const auto& th : t.thetas) thetas.push_back(to_json(th));
  json movement = json::array();
  for (const auto& e : t.movement_events) movement.push_back({{"start", e.start}, {"duration", e.duration}, {"thump", e.thump}});
  json uc = json::array();
  for (const auto& c : t.contractions) {
    uc.push_back({{"start", c.start}, {"duration", c.duration}, {"rise", c.rise}, {"fall", c.fall}});
  }
  json params = json::object();
  for (const auto& p : config_schema()) params[p.key] = p.get(rec.config);
  return json{
      {"fs", rec.mixture.fs},
      {"n_samples", rec.mixture.size()},
      {"seed", rec.seed},
      {"sigma_n", rec.sigma_n},
      {"preset", rec.config.preset},
      {"annotations",
       {{"cycles", t.thetas.size()},
        {"rr", t.rr.rr},
        {"rr_mode", to_string(t.rr.mode)},
        {"onset_times", t.onset_times},
        {"onset_samples", t.onset_samples},
        {"s2_times", t.s2_times},
        {"theta", thetas},
        {"maternal_onsets", t.maternal_onsets},
        {"movement_events", movement},
        {"contractions", uc}}},
      {"config", params},
  };
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  finish(out, path);
}

std::vector<std::filesystem::path> export_recording(const Recording& rec, const std::filesystem::path& dir,
                                                    const std::string& stem, const ExportOptions& opt) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> out;
  if (opt.wav) {
    out.push_back(dir / (stem + ".wav"));
    write_wav(out.back(), rec.mixture, opt.encoding);
    if (opt.components) {
      for (const auto& [name, sig] : components(rec)) {
        out.push_back(dir / (stem + "_" + name + ".wav"));
        write_wav(out.back(), *sig, opt.encoding);
      }
    }
  }
  if (opt.csv) {
    out.push_back(dir / (stem + ".csv"));
    write_csv(out.back(), rec);
  }
  out.push_back(dir / (stem + ".json"));
  write_text(out.back(), sidecar_json(rec).dump(2) + "\n");
  return out;
}

Signal ingest_recording(const std::filesystem::path& path, std::optional<double> fs_hint, std::optional<double> target_fs) {
  if (!std::filesystem::exists(path)) throw Error(ErrorKind::io, "no such file: " + path.string());
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  Signal s;
  if (ext == ".wav") {
    s = read_wav(path);
  } else if (ext == ".csv" || ext == ".txt" || ext == ".dat") {
    s = read_csv(path, fs_hint);
  } else {
    throw Error(ErrorKind::unsupported_format, path.string() + ": expected .wav or .csv");
  }
  validate(s);
  if (target_fs && *target_fs != s.fs) s = resample(s, *target_fs);
  return s;
}

json to_json(const Curve& c, const char* x_name, const char* y_name) {
  json j{{x_name, c.x}, {y_name, c.y}};
  if (!c.spread.empty()) j["std"] = c.spread;
  return j;
}

json to_json(const CompareReport& r) {
  auto side = [](const Analysis& a) {
    return json{{"t0", a.t0},
                {"n_cycles", a.cycles.size()},
                {"acf", to_json(a.acf, "lag", "value")},
                {"psd", to_json(a.psd, "freq", "db")}};
  };
  return json{{"acf_rmse", r.acf_rmse},
              {"psd_rmse_db", r.psd_rmse_db},
              {"envelope_corr", r.envelope_corr},
              {"real", side(r.real)},
              {"sim", side(r.sim)}};
}

json to_json(const FitResult& f) {
  return json{{"cycle_index", f.cycle_index},
              {"theta", to_json(f.theta)},
              {"residual_rms", f.residual_rms},
              {"converged", f.converged},
              {"iterations", f.iterations}};
}

json to_json(const ParamSummary& s) {
  json cov = json::array();
  for (const auto& row : s.covariance) cov.push_back(row);
  return json{{"names", theta_names()}, {"mean", s.mean}, {"covariance", cov}, {"box", to_json(s.box)},
              {"n_cycles", s.n_cycles}};
}

json to_json(const CornerData& c) {
  json marg = json::object();
  for (std::size_t i = 0; i < kThetaDim; ++i) {
    marg[theta_names()[i]] = {{"edges", c.marginals[i].edges}, {"density", c.marginals[i].density}};
  }
  json pairs = json::array();
  for (const auto& g : c.pairs) {
    pairs.push_back({{"x", theta_names()[g.i]},
                     {"y", theta_names()[g.j]},
                     {"x_edges", g.x_edges},
                     {"y_edges", g.y_edges},
                     {"density", g.density}});
  }
  return json{{"n_samples", c.samples.size()}, {"marginals", marg}, {"pairs", pairs}};
}

json to_json(const CalibrationResult& r) {
  json fits = json::array();
  for (const auto& f : r.fits) fits.push_back(to_json(f));
  std::size_t converged = 0;
  for (const auto& f : r.fits) converged += f.converged ? 1 : 0;
  return json{{"fs", r.analysis.envelopes.envelope.fs},
              {"t0", r.analysis.t0},
              {"n_cycles", r.analysis.cycles.size()},
              {"n_converged", converged},
              {"delta_t_measured", r.delta_t_measured},
              {"fits", fits},
              {"summary", to_json(r.summary)},
              {"corner", to_json(r.corner)}};
}

void write_curve_csv(const std::filesystem::path& path, const Curve& c, const std::string& x_name, const std::string& y_name) {
  auto out = open_out(path);
  out << x_name << ',' << y_name;
  if (!c.spread.empty()) out << ",std";
  out << '\n';
  for (std::size_t i = 0; i < c.x.size(); ++i) {
    out << num(c.x[i]) << ',' << num(c.y[i]);
    if (!c.spread.empty()) out << ',' << num(c.spread[i]);
    out << '\n';
  }
  finish(out, path);
}

std::vector<std::filesystem::path> write_corner_csv(const std::filesystem::path& dir, const CornerData& c) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> out;
  const auto& names = theta_names();
  {
    out.push_back(dir / "samples.csv");
    auto f = open_out(out.back());
    for (std::size_t i = 0; i < kThetaDim; ++i) f << (i ? "," : "") << names[i];
    f << '\n';
    for (const auto& s : c.samples) {
      for (std::size_t i = 0; i < kThetaDim; ++i) f << (i ? "," : "") << num(s[i]);
      f << '\n';
    }
    finish(f, out.back());
  }
  for (std::size_t i = 0; i < kThetaDim; ++i) {
    out.push_back(dir / ("marginal_" + names[i] + ".csv"));
    auto f = open_out(out.back());
    f << "lo,hi,density\n";
    const auto& h = c.marginals[i];
    for (std::size_t b = 0; b < h.density.size(); ++b) f << num(h.edges[b]) << ',' << num(h.edges[b + 1]) << ',' << num(h.density[b]) << '\n';
    finish(f, out.back());
  }
  for (const auto& g : c.pairs) {
    out.push_back(dir / ("pair_" + names[g.i] + "_" + names[g.j] + ".csv"));
    auto f = open_out(out.back());
    f << names[g.i] << ',' << names[g.j] << ",density\n";
    const std::size_t nx = g.x_edges.size() - 1, ny = g.y_edges.size() - 1;
    for (std::size_t a = 0; a < nx; ++a) {
      for (std::size_t b = 0; b < ny; ++b) {
        f << num(0.5 * (g.x_edges[a] + g.x_edges[a + 1])) << ',' << num(0.5 * (g.y_edges[b] + g.y_edges[b + 1])) << ','
          << num(g.density[a * ny + b]) << '\n';
      }
    }
    finish(f, out.back());
  }
  return out;
}

}  // namespace fpcg
