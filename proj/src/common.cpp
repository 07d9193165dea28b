#include <cmath>
#include <iostream>
#include <mutex>
#include <sstream>

#include "fpcg/error.hpp"
#include "fpcg/log.hpp"
#include "fpcg/seed.hpp"
#include "fpcg/signal.hpp"

namespace fpcg {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parameter_domain: return "parameter_domain";
    case ErrorKind::aliasing: return "aliasing";
    case ErrorKind::cycle_geometry: return "cycle_geometry";
    case ErrorKind::config: return "config";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::truncation: return "truncation";
    case ErrorKind::instability: return "instability";
    case ErrorKind::snr_undefined: return "snr_undefined";
    case ErrorKind::mis_specified_prior: return "mis_specified_prior";
    case ErrorKind::diagnostics: return "diagnostics";
    case ErrorKind::band_infeasible: return "band_infeasible";
    case ErrorKind::no_periodicity: return "no_periodicity";
    case ErrorKind::segmentation: return "segmentation";
    case ErrorKind::insufficient_data: return "insufficient_data";
    case ErrorKind::io: return "io";
    case ErrorKind::unsupported_format: return "unsupported_format";
  }
  return "unknown";
}

void validate(const Signal& s) {
  if (!(s.fs > 0.0) || !std::isfinite(s.fs)) {
    throw Error(ErrorKind::parameter_domain, "signal sample rate must be finite and > 0");
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!std::isfinite(s[i])) {
      std::ostringstream os;
      os << "signal sample " << i << " is not finite";
      throw Error(ErrorKind::parameter_domain, os.str());
    }
  }
}

double rms(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v;
  return acc / static_cast<double>(x.size());
}

double max_abs(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

Signal add(const Signal& a, const Signal& b) {
  if (a.size() != b.size()) throw Error(ErrorKind::parameter_domain, "add: length mismatch");
  if (a.fs != b.fs) throw Error(ErrorKind::parameter_domain, "add: sample rate mismatch");
  Signal out(a.size(), a.fs);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

namespace {

std::mutex g_sink_mutex;
WarningSink g_sink = [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

WarningSink set_warning_sink(WarningSink sink) {
  std::lock_guard lock(g_sink_mutex);
  std::swap(g_sink, sink);
  return sink;
}

void warn(const std::string& message) {
  std::lock_guard lock(g_sink_mutex);
  if (g_sink) g_sink(message);
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) {
  return splitmix64(master ^ fnv1a64(tag));
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t index) {
  return splitmix64(derive_seed(master, tag) + splitmix64(index));
}

}  // namespace fpcg
