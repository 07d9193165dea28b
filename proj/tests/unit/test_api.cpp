#include <doctest.h>

#include <cmath>
#include <json.hpp>

#include "fpcg/api.hpp"
#include "fpcg/config.hpp"

using namespace fpcg;
using nlohmann::json;

namespace {
double in_band_mean_db(const json& psd, double lo, double hi) {
  double s = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < psd["freq"].size(); ++i) {
    const double f = psd["freq"][i];
    if (f >= lo && f <= hi) {
      s += psd["db"][i].get<double>();
      ++n;
    }
  }
  return s / n;
}
}  // namespace

TEST_SUITE("api") {
  TEST_CASE("preset catalog") {
    const ApiResponse r = handle_presets();
    REQUIRE(r.status == 200);
    const json body = json::parse(r.body);
    CHECK(body["presets"].size() == presets().size());
    CHECK(body["presets"][0]["name"] == "normal");
    CHECK(body["parameters"].size() == config_schema().size());
    bool found = false;
    for (const auto& p : body["parameters"]) {
      if (p["key"] == "snr_db") {
        found = true;
        CHECK(p["range"][0] == 5.0);
        CHECK(p["range"][1] == 20.0);
        CHECK(p["default"] == "10");
      }
    }
    CHECK(found);
    for (const auto& p : body["presets"]) {
      if (p["name"] == "low_snr") CHECK(p["overrides"]["snr_db"] == "5");
    }
  }

  TEST_CASE("synthesize with defaults") {
    const ApiResponse r = handle_synthesize(R"({"n_cycles": 30, "seed": 4})");
    REQUIRE(r.status == 200);
    const json b = json::parse(r.body);
    std::size_t expect = 0;
    for (const auto& rr : b["annotations"]["rr"]) expect += static_cast<std::size_t>(std::lround(rr.get<double>() * 1000.0));
    CHECK(b["n_samples"] == expect);
    CHECK(b["mixture"].size() == expect);
    CHECK(b["envelope"].size() == expect);
    CHECK(b["truncated"] == false);
    CHECK(b["psd"]["freq"].size() == b["psd"]["db"].size());
    CHECK(b["acf"]["lag"].size() == b["acf"]["value"].size());
    CHECK(b["acf"]["value"][0] == 1.0);
    CHECK(b["annotations"]["onset_times"].size() == 30);
  }

  TEST_CASE("payload cap") {
    ApiOptions opt;
    opt.max_seconds = 5.0;
    const json b = json::parse(handle_synthesize(R"({"n_cycles": 30})", opt).body);
    CHECK(b["mixture"].size() == 5000);
    CHECK(b["truncated"] == true);
  }

  TEST_CASE("noise floor follows snr") {
    const json lo = json::parse(handle_synthesize(R"({"n_cycles": 100, "seed": 2, "overrides": {"snr_db": 5}})").body);
    const json hi = json::parse(handle_synthesize(R"({"n_cycles": 100, "seed": 2, "overrides": {"snr_db": 20}})").body);
    const double diff = in_band_mean_db(lo["noise_psd"], 20.0, 150.0) - in_band_mean_db(hi["noise_psd"], 20.0, 150.0);
    CHECK(diff == doctest::Approx(15.0).epsilon(0.02));
  }

  TEST_CASE("deterministic bytes") {
    const std::string req = R"({"preset": "weak_hrv", "n_cycles": 20, "seed": 77})";
    CHECK(handle_synthesize(req).body == handle_synthesize(req).body);
  }

  TEST_CASE("error statuses") {
    CHECK(handle_synthesize("{not json").status == 400);
    CHECK(handle_synthesize("[1, 2]").status == 400);
    const ApiResponse r = handle_synthesize(R"({"overrides": {"snr_db": 50}})");
    CHECK(r.status == 422);
    CHECK(json::parse(r.body)["error"]["field"] == "snr_db");
    CHECK(json::parse(handle_synthesize(R"({"overrides": {"wat": 1}})").body)["error"]["field"] == "wat");
    CHECK(json::parse(handle_synthesize(R"({"preset": "nope"})").body)["error"]["field"] == "preset");
    CHECK(json::parse(handle_synthesize(R"({"n_cycles": 0})").body)["error"]["field"] == "n_cycles");
    CHECK(handle_synthesize(R"({"seed": -1})").status == 422);
  }

  TEST_CASE("validate endpoint") {
    const json syn = json::parse(handle_synthesize(R"({"n_cycles": 60, "seed": 9})").body);
    json req{{"reference", {{"fs", syn["fs"]}, {"samples", syn["mixture"]}}}, {"n_cycles", 60}, {"seed", 9}};
    const ApiResponse r = handle_validate(req.dump());
    REQUIRE(r.status == 200);
    const json rep = json::parse(r.body);
    CHECK(rep["acf_rmse"] == 0.0);
    CHECK(rep["psd_rmse_db"] == 0.0);
    CHECK(rep["envelope_corr"].get<double>() == doctest::Approx(1.0));
    CHECK(handle_validate(R"({"n_cycles": 5})").status == 422);
  }
}
