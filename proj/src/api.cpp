#include "fpcg/api.hpp"

#include <cmath>
#include <optional>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "fpcg/analysis.hpp"
#include "fpcg/config.hpp"
#include "fpcg/error.hpp"
#include "fpcg/io.hpp"
#include "fpcg/simulate.hpp"

namespace fpcg {

using nlohmann::json;

namespace {

ApiResponse reply(int status, const json& j) { return {status, j.dump()}; }

ApiResponse error_reply(int status, const std::string& kind, const std::string& message,
                        std::optional<std::string> field = std::nullopt, std::optional<std::string> stage = std::nullopt) {
  json e{{"kind", kind}, {"message", message}};
  e["field"] = field ? json(*field) : json(nullptr);
  e["stage"] = stage ? json(*stage) : json(nullptr);
  return reply(status, json{{"error", e}});
}

// Thrown while reading a request; becomes a 4xx reply.
struct RequestError {
  int status;
  std::string message;
  std::optional<std::string> field;
};

std::string value_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_null()) return "";
  if (v.is_array()) {
    std::string s;
    for (const auto& x : v) {
      if (!x.is_number()) throw std::invalid_argument("array elements must be numbers");
      s += (s.empty() ? "" : ", ") + x.dump();
    }
    return s;
  }
  if (v.is_number()) return v.dump();
  throw std::invalid_argument("unsupported value type");
}

SimConfig request_config(const json& req, const ApiOptions& opt) {
  if (!req.is_object()) throw RequestError{400, "request body must be a JSON object", std::nullopt};
  SimConfig cfg;
  if (req.contains("preset") && !req["preset"].is_null()) {
    if (!req["preset"].is_string()) throw RequestError{422, "preset must be a string", "preset"};
    try {
      cfg = preset_config(req["preset"].get<std::string>());
    } catch (const Error& e) {
      throw RequestError{422, e.what(), "preset"};
    }
  }
  if (req.contains("overrides")) {
    const auto& ov = req["overrides"];
    if (!ov.is_object()) throw RequestError{422, "overrides must be an object", "overrides"};
    for (const auto& [key, value] : ov.items()) {
      if (key == "preset" || key == "seed") throw RequestError{422, key + " is a top-level field", key};
      try {
        apply_override(cfg, key, value_text(value), true);
      } catch (const Error& e) {
        throw RequestError{422, e.what(), key};
      } catch (const std::invalid_argument& e) {
        throw RequestError{422, key + ": " + e.what(), key};
      }
    }
  }
  if (req.contains("n_cycles")) {
    const auto& n = req["n_cycles"];
    if (!n.is_number_integer() || n.get<long long>() < 1 || n.get<long long>() > opt.max_cycles) {
      throw RequestError{422, "n_cycles must be an integer in [1, " + std::to_string(opt.max_cycles) + "]", "n_cycles"};
    }
    cfg.cycles_per_sample = static_cast<int>(n.get<long long>());
  }
  if (req.contains("seed")) {
    const auto& s = req["seed"];
    if (!s.is_number_unsigned()) throw RequestError{422, "seed must be a non-negative integer", "seed"};
    cfg.seed = s.get<std::uint64_t>();
  }
  try {
    validate(cfg);
  } catch (const Error& e) {
    throw RequestError{422, e.what(), std::nullopt};
  }
  return cfg;
}

std::vector<double> head(const std::vector<double>& v, std::size_t n) {
  return {v.begin(), v.begin() + static_cast<long>(std::min(n, v.size()))};
}

json noise_psd(const Signal& noise) {
  WelchOptions w;
  w.segment = std::min(noise.size(), static_cast<std::size_t>(std::lround(2.0 * noise.fs)));
  const auto est = welch_psd(noise, w);
  std::vector<double> db(est.psd.size());
  for (std::size_t k = 0; k < db.size(); ++k) db[k] = 10.0 * std::log10(std::max(est.psd[k], 1e-300));
  return json{{"freq", est.freq}, {"db", db}};
}

template <typename F>
ApiResponse guarded(F&& f) {
  try {
    return f();
  } catch (const RequestError& e) {
    return error_reply(e.status, e.status == 400 ? "bad_request" : "invalid_field", e.message, e.field);
  } catch (const json::exception& e) {
    return error_reply(400, "bad_request", e.what());
  } catch (const Error& e) {
    return error_reply(500, std::string(to_string(e.kind())), e.what(), std::nullopt,
                       e.stage().empty() ? std::nullopt : std::optional<std::string>(e.stage()));
  } catch (const std::exception& e) {
    return error_reply(500, "internal", e.what());
  }
}

json parse_body(const std::string& body) {
  json req = json::parse(body, nullptr, false);
  if (req.is_discarded()) throw RequestError{400, "malformed JSON body", std::nullopt};
  return req;
}

}  // namespace

ApiResponse handle_presets() {
  return guarded([] {
    json list = json::array();
    for (const auto& p : presets()) {
      const SimConfig cfg = preset_config(p.name);
      const SimConfig base;
      json ov = json::object();
      for (const auto& spec : config_schema()) {
        if (spec.key == "preset") continue;
        const auto v = spec.get(cfg);
        if (v != spec.get(base)) ov[spec.key] = v;
      }
      list.push_back({{"name", p.name}, {"description", p.description}, {"overrides", ov}});
    }
    json params = json::array();
    const SimConfig defaults;
    for (const auto& spec : config_schema()) {
      json p{{"key", spec.key}, {"section", spec.section}, {"type", spec.type}, {"description", spec.description},
             {"default", spec.get(defaults)}};
      p["range"] = spec.range ? json::array({spec.range->first, spec.range->second}) : json(nullptr);
      if (!spec.choices.empty()) p["choices"] = spec.choices;
      params.push_back(p);
    }
    return reply(200, json{{"presets", list}, {"parameters", params}});
  });
}

ApiResponse handle_synthesize(const std::string& body, const ApiOptions& opt) {
  return guarded([&] {
    const SimConfig cfg = request_config(parse_body(body), opt);
    const Recording rec = simulate(cfg);
    const double fs = rec.mixture.fs;
    const auto cap = static_cast<std::size_t>(std::floor(opt.max_seconds * fs));
    const PreprocConfig pre;

    json out{{"fs", fs}, {"n_samples", rec.mixture.size()}, {"seed", rec.seed}, {"preset", cfg.preset},
             {"truncated", rec.mixture.size() > cap}, {"sigma_n", rec.sigma_n}};
    out["mixture"] = head(rec.mixture.samples, cap);
    try {
      out["envelope"] = head(preprocess_envelope(rec.mixture, pre).samples, cap);
    } catch (const Error& e) {
      out["envelope"] = nullptr;
      out["envelope_error"] = e.what();
    }
    try {
      WelchOptions w;
      w.segment = std::min(rec.mixture.size(), static_cast<std::size_t>(std::lround(pre.welch_segment * fs)));
      w.overlap = pre.welch_overlap;
      const Curve psd = welch_psd_db(rec.mixture, pre, w);
      out["psd"] = {{"freq", psd.x}, {"db", psd.y}, {"std", psd.spread}};
    } catch (const Error& e) {
      out["psd"] = nullptr;
      out["psd_error"] = e.what();
    }
    out["noise_psd"] = rec.sigma_n > 0.0 ? noise_psd(rec.noise) : json(nullptr);
    try {
      const Analysis a = analyze(rec.mixture, pre);
      out["acf"] = {{"lag", a.acf.x}, {"value", a.acf.y}};
      out["t0"] = a.t0;
    } catch (const Error& e) {
      out["acf"] = nullptr;
      out["acf_error"] = e.what();
    }
    out["annotations"] = sidecar_json(rec)["annotations"];
    return reply(200, out);
  });
}

ApiResponse handle_validate(const std::string& body, const ApiOptions& opt) {
  return guarded([&] {
    json req = parse_body(body);
    if (!req.is_object() || !req.contains("reference")) throw RequestError{422, "reference recording required", "reference"};
    const auto ref = req["reference"];
    if (!ref.is_object() || !ref.contains("fs") || !ref.contains("samples") || !ref["fs"].is_number() ||
        !ref["samples"].is_array()) {
      throw RequestError{422, "reference needs fs and samples", "reference"};
    }
    Signal real(ref["samples"].get<std::vector<double>>(), ref["fs"].get<double>());
    try {
      validate(real);
    } catch (const Error& e) {
      throw RequestError{422, e.what(), "reference"};
    }
    req.erase("reference");
    const SimConfig cfg = request_config(req, opt);
    const Recording rec = simulate(cfg);
    const CompareReport report = compare_stats(real, rec.mixture, PreprocConfig{});
    return reply(200, to_json(report));
  });
}

struct ApiServer::Impl {
  ApiOptions opt;
  httplib::Server server;
  std::thread thread;
};

namespace {

void install_routes(httplib::Server& server, const ApiOptions& opt) {
  auto send = [](httplib::Response& res, const ApiResponse& r) {
    res.status = r.status;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_content(r.body, "application/json");
  };
  server.Get("/presets", [send](const httplib::Request&, httplib::Response& res) { send(res, handle_presets()); });
  server.Post("/synthesize", [send, opt](const httplib::Request& req, httplib::Response& res) {
    send(res, handle_synthesize(req.body, opt));
  });
  server.Post("/validate", [send, opt](const httplib::Request& req, httplib::Response& res) {
    send(res, handle_validate(req.body, opt));
  });
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
  server.Get("/health", [](const httplib::Request&, httplib::Response& res) { res.set_content("{\"ok\":true}", "application/json"); });
}

}  // namespace

ApiServer::ApiServer(ApiOptions opt) : impl_(std::make_unique<Impl>()) { impl_->opt = opt; }

ApiServer::~ApiServer() { stop(); }

int ApiServer::start(const std::string& host, int port) {
  install_routes(impl_->server, impl_->opt);
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw Error(ErrorKind::io, "cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void ApiServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

void serve(const std::string& host, int port, const ApiOptions& opt) {
  httplib::Server server;
  install_routes(server, opt);
  if (!server.bind_to_port(host, port)) throw Error(ErrorKind::io, "cannot bind " + host + ":" + std::to_string(port));
  server.listen_after_bind();
}

}  // namespace fpcg
