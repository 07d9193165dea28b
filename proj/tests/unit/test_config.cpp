#include <doctest.h>

#include <cmath>
#include <json.hpp>
#include <sstream>

#include "fpcg/api.hpp"
#include "fpcg/config.hpp"
#include "fpcg/error.hpp"
#include "fpcg/log.hpp"

using namespace fpcg;

namespace {
struct CaptureWarnings {
  std::vector<std::string> seen;
  WarningSink prev;
  CaptureWarnings() {
    prev = set_warning_sink([this](const std::string& m) { seen.push_back(m); });
  }
  ~CaptureWarnings() { set_warning_sink(prev); }
};

std::vector<double> numbers(const std::string& s) {
  std::vector<double> v;
  std::string t = s;
  for (char& c : t) {
    if (c == ',') c = ' ';
  }
  std::istringstream is(t);
  double x;
  while (is >> x) v.push_back(x);
  return v;
}

std::string join(const std::vector<double>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  return os.str();
}

// A non-default value for every schema entry.
std::string probe_value(const ParamSpec& p, const SimConfig& d) {
  const std::string cur = p.get(d);
  if (p.type == "bool") return cur == "true" ? "false" : "true";
  if (p.type == "choice") return p.choices.back() != cur ? p.choices.back() : p.choices.front();
  if (p.type == "int") {
    if (p.key == "mcmc_walkers") return "40";
    return std::to_string(std::stoll(cur) + 3);
  }
  if (p.type == "float") {
    if (p.range) return std::to_string(p.range->first + 0.37 * (p.range->second - p.range->first));
    return std::to_string(std::stod(cur) * 0.9);
  }
  if (p.type == "pair") {
    const auto [lo, hi] = *p.range;
    return join({lo + 0.2 * (hi - lo), lo + 0.6 * (hi - lo)});
  }
  if (p.key == "rr_series") return "0.4, 0.45";
  if (p.key == "delta_t_measured") return "0.2, 0.21";
  if (p.key == "prior_mean" || p.key == "prior_std") {
    std::vector<double> v;
    for (std::size_t i = 0; i < kThetaDim; ++i) {
      const double m = 0.5 * (d.box.lower[i] + d.box.upper[i]);
      v.push_back(p.key == "prior_mean" ? m : 0.3 * (d.box.upper[i] - d.box.lower[i]));
    }
    return join(v);
  }
  auto v = numbers(cur);
  for (double& x : v) x *= p.key == "box_lower" ? 1.01 : 0.99;
  return join(v);
}
}  // namespace

TEST_SUITE("config") {
  TEST_CASE("empty text gives the defaults") {
    const SimConfig c = load_config("");
    CHECK(c == SimConfig{});
    CHECK(c.fhr == 140.0);
    CHECK(c.maternal.mhr == 80.0);
    CHECK(c.fs == 1000.0);
    CHECK(c.noise.snr_db == 10.0);
    CHECK(c.transmission.beta1 == 100.0);
    CHECK(c.transmission.beta2 == 300.0);
    CHECK(c.transmission.a1 == 1.0);
    CHECK(c.transmission.a2 == 0.8);
    CHECK(c.transmission.r1 == 0.01);
    CHECK(c.transmission.c1 == 1500.0);
    CHECK(c.transmission.r2 == 0.03);
    CHECK(c.transmission.c2 == 1540.0);
    CHECK(c.num_samples == 10);
    CHECK(c.cycles_per_sample == 100);
    CHECK(c.movement.intensity == 1.3);
    CHECK(c.movement.rate_per_min == 8.0);
    CHECK(c.movement.duration_range == Interval{0.12, 0.45});
    CHECK(c.movement.band == Interval{15.0, 200.0});
    CHECK(c.movement.thump_prob == 0.35);
    CHECK(c.uterine.rate_per_10min == 4.0);
    CHECK(c.uterine.duration_range == Interval{10.0, 25.0});
    CHECK(c.uterine.rise_fall_frac == Interval{0.35, 0.35});
    CHECK(c.uterine.attenuation == 0.45);
    CHECK(c.uterine.noise_band == Interval{0.5, 18.0});
    CHECK(c.uterine.noise_intensity == 0.8);
    CHECK(range_violations(c).empty());
    CHECK_NOTHROW(validate(c));
  }

  TEST_CASE("sections, comments and top-level keys") {
    const SimConfig c = load_config("fhr = 150 ; inline\n# comment\n[noise]\nsnr_db = 15\n[transmission]\nA2 = 0.9\n");
    CHECK(c.fhr == 150.0);
    CHECK(c.noise.snr_db == 15.0);
    CHECK(c.transmission.a2 == 0.9);
  }

  TEST_CASE("range checks warn or fail") {
    CaptureWarnings w;
    const SimConfig c = load_config("[heart]\nfhr = 170\n");
    CHECK(c.fhr == 170.0);
    CHECK(!w.seen.empty());
    CHECK(range_violations(c).size() == 1);
    CHECK_THROWS_AS(load_config("[heart]\nfhr = 170\n", {true}), Error);
    try {
      load_config("[heart]\nfhr = 500\n", {true});
      FAIL("expected config error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::config);
    }
    // RR outside the plausibility band is a hard error in either mode
    CHECK_THROWS_AS(load_config("[heart]\nfhr = 500\n"), Error);
  }

  TEST_CASE("unknown keys warn, malformed values fail") {
    CaptureWarnings w;
    load_config("[heart]\nbogus_key = 3\n");
    REQUIRE(w.seen.size() == 1);
    CHECK(w.seen[0].find("bogus_key") != std::string::npos);
    CHECK_THROWS_AS(load_config("[heart]\nfhr = fast\n"), Error);
    CHECK_THROWS_AS(load_config("[heart\nfhr = 140\n"), Error);
    CHECK_THROWS_AS(load_config("[hrv]\nrr_mode = chaotic\n"), Error);
  }

  TEST_CASE("serialize round trip") {
    SimConfig c;
    c.fhr = 133.5;
    c.noise.snr_db = std::numeric_limits<double>::infinity();
    c.prior.kind = PriorKind::truncated_gaussian;
    c.prior.std = ThetaVector{0.1, 0.1, 0.002, 0.002, 0.01};
    c.hrv.explicit_rr = {0.41, 0.44};
    c.movement.band = {12.5, 180.0};
    c.seed = 123456789012345ULL;
    c.transmission.use_delays = false;
    CHECK(load_config(serialize_config(c)) == c);
    for (const auto& p : presets()) CHECK(load_config(serialize_config(preset_config(p.name))) == preset_config(p.name));
  }

  TEST_CASE("hard invariants") {
    SimConfig c;
    c.fs = 150.0;
    CHECK_THROWS_AS(validate(c), Error);
    c = {};
    c.fetal_events.f0_s2 = 300.0;
    try {
      validate(c);
      FAIL("expected aliasing");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::aliasing);
    }
    c = {};
    c.fhr = 200.0;
    c.box.upper[4] = 0.31;
    CHECK_THROWS_AS(validate(c), Error);
    c = {};
    c.prior.kind = PriorKind::ensemble_mcmc;
    c.prior.walkers = 6;
    CHECK_THROWS_AS(validate(c), Error);
  }

  TEST_CASE("overrides") {
    SimConfig c;
    apply_override(c, "snr_db", "15");
    apply_override(c, "movement_band", "20, 150");
    CHECK(c.noise.snr_db == 15.0);
    CHECK(c.movement.band == Interval{20.0, 150.0});
    CHECK_THROWS_AS(apply_override(c, "nope", "1"), Error);
    CHECK_THROWS_AS(apply_override(c, "fhr", "500", true), Error);
    c.seed = 99;
    apply_override(c, "preset", "low_snr");
    CHECK(c.preset == "low_snr");
    CHECK(c.noise.snr_db == 5.0);
    CHECK(c.seed == 99);
  }

  TEST_CASE("presets") {
    const auto& list = presets();
    REQUIRE(!list.empty());
    CHECK(list.front().name == "normal");
    for (const char* name : {"delta_t_shift", "s2_s1_ratio", "low_snr", "high_attenuation", "weak_hrv"}) {
      const SimConfig c = preset_config(name);
      CHECK(c.preset == name);
      CHECK(c != SimConfig{});
      CHECK_NOTHROW(validate(c));
      CHECK(!find_preset(name).description.empty());
    }
    CHECK(preset_config("normal") == SimConfig{});
    CHECK(preset_config("low_snr").noise.snr_db == 5.0);
    CHECK(preset_config("weak_hrv").rr_mode == RRMode::weak_hrv);
    CHECK_THROWS_AS(preset_config("nonexistent"), Error);
    const SimConfig based = load_config("preset = low_snr\n[heart]\nfhr = 150\n");
    CHECK(based.noise.snr_db == 5.0);
    CHECK(based.fhr == 150.0);
  }

  TEST_CASE("every key is reachable from ini, overrides and the api") {
    const SimConfig d;
    std::size_t probed = 0;
    for (const auto& p : config_schema()) {
      if (p.key == "preset") continue;
      CAPTURE(p.key);
      const std::string v = probe_value(p, d);
      // bootstrapping dT needs measurements to draw from
      const bool needs_dt = p.key == "stabilize_delta_t";
      SimConfig base = d;
      if (needs_dt) base.delta_t_measured = {0.2};
      SimConfig expected = base;
      p.set(expected, v);
      REQUIRE(p.get(expected) != p.get(d));

      CaptureWarnings w;
      const std::string extra = needs_dt ? "delta_t_measured = 0.2\n" : "";
      const SimConfig from_ini = load_config("[" + p.section + "]\n" + extra + p.key + " = " + v + "\n");
      CHECK(p.get(from_ini) == p.get(expected));
      CHECK(from_ini == expected);
      CHECK(w.seen.empty());

      SimConfig from_set = base;
      apply_override(from_set, p.key, v);
      CHECK(from_set == expected);

      if (p.key != "seed") {
        nlohmann::json req{{"n_cycles", 5}, {"seed", 1}, {"overrides", {{p.key, v}}}};
        if (needs_dt) req["overrides"]["delta_t_measured"] = "0.2";
        const ApiResponse r = handle_synthesize(req.dump());
        if (r.status == 422) {
          const auto body = nlohmann::json::parse(r.body);
          CHECK(body["error"]["field"] != p.key);
        }
      }
      ++probed;
    }
    CHECK(probed == config_schema().size() - 1);
  }
}
