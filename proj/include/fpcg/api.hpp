#pragma once

#include <memory>
#include <string>

namespace fpcg {

struct ApiResponse {
  int status = 200;
  std::string body;  // JSON
};

struct ApiOptions {
  double max_seconds = 60.0;  // returned arrays are cut to this duration
  int max_cycles = 2000;
};

/// GET /presets: preset list (name, description, overrides) and the
/// parameter catalog (key, section, type, default, range, choices).
ApiResponse handle_presets();

/// POST /synthesize with {"preset", "overrides": {key: value}, "n_cycles",
/// "seed"}. 400 on malformed JSON, 422 on a bad field (named in
/// error.field), 500 with error.stage when synthesis fails.
ApiResponse handle_synthesize(const std::string& body, const ApiOptions& opt = {});

/// POST /validate with {"reference": {"fs", "samples"}, plus the synthesize
/// fields}: compare_stats of the reference against a fresh synthesis.
ApiResponse handle_validate(const std::string& body, const ApiOptions& opt = {});

/// Runs the HTTP service in a background thread until stop() or destruction.
class ApiServer {
 public:
  explicit ApiServer(ApiOptions opt = {});
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Binds host:port (port 0 picks a free one) and returns the bound port.
  int start(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Blocking service on host:port.
void serve(const std::string& host, int port, const ApiOptions& opt = {});

}  // namespace fpcg
