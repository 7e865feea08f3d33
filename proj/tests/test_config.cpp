#include <string>

#include "doctest.h"
#include "json.hpp"
#include "wncs/config.hpp"

using namespace wncs;
using nlohmann::json;

namespace {

json base_json() {
  return json::parse(R"({
    "plant": {
      "A": [[1.1, 0.2], [0.2, 0.8]],
      "B": [[-1.0, 0.0], [0.0, -1.0]],
      "K": [[1.1, 0.2], [0.2, 0.8]],
      "Q": [[1.0, 0.0], [0.0, 1.0]],
      "R": [[1.0, 0.0], [0.0, 1.0]],
      "v": 1
    },
    "channel": {"kind": "static", "ps": 0.1, "pc": 0.1},
    "policy": {"kind": "all"},
    "sim": {"K": 10000, "replications": 100, "seed": 7, "x0": [1.0, -1.0]}
  })");
}

void expect_error_naming(const json& j, const std::string& key_fragment) {
  try {
    (void)parse_config(j.dump());
    FAIL("expected a config error mentioning ", key_fragment);
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find(key_fragment) != std::string::npos);
  }
}

}  // namespace

TEST_CASE("full static config parses with defaults applied") {
  const RunConfig cfg = parse_config(base_json().dump());
  CHECK(cfg.A(0, 0) == 1.1);
  CHECK(cfg.B(1, 1) == -1.0);
  CHECK(cfg.v == 1);
  CHECK(std::get<StaticChannel>(cfg.channel).p_s == 0.1);
  CHECK(cfg.policy_kind == "all");
  CHECK(cfg.horizon == 10000);
  CHECK(cfg.replications == 100);
  CHECK(cfg.seed == 7);
  CHECK(cfg.x0 == Vec{1.0, -1.0});
  // defaults
  CHECK(cfg.bound == 20);
  CHECK(cfg.tol == 1e-8);
  CHECK(cfg.max_iter == 100000);
  CHECK(cfg.div_window == 10000);
  CHECK(cfg.div_growth == 1.5);
  CHECK_FALSE(cfg.has_sweep());

  const PlantModel p = build_plant(cfg);
  CHECK(p.cls == ControllabilityClass::OneStep);
}

TEST_CASE("explicit mdp and divergence settings override the defaults") {
  json j = base_json();
  j["mdp"] = {{"bound", 12}, {"tol", 1e-6}, {"max_iter", 5000}};
  j["sim"]["div_window"] = 500;
  j["sim"]["div_growth"] = 2.0;
  const RunConfig cfg = parse_config(j.dump());
  CHECK(cfg.bound == 12);
  CHECK(cfg.tol == 1e-6);
  CHECK(cfg.max_iter == 5000);
  CHECK(cfg.div_window == 500);
  CHECK(cfg.div_growth == 2.0);
}

TEST_CASE("fading config parses into a markov channel") {
  json j = base_json();
  j["channel"] = {{"kind", "fading"},
                  {"omega", {0.1, 0.4}},
                  {"xi", {0.1, 0.4}},
                  {"Ds", {{0.8, 0.2}, {0.2, 0.8}}},
                  {"Dc", {{0.5, 0.5}, {0.5, 0.5}}}};
  const RunConfig cfg = parse_config(j.dump());
  const auto& mk = std::get<MarkovChannel>(cfg.channel);
  CHECK(mk.omega == std::vector<double>{0.1, 0.4});
  CHECK(mk.D_s(0, 0) == 0.8);
  CHECK(mk.D_c(1, 0) == 0.5);
}

TEST_CASE("round trip through the canonical dump is exact") {
  json j = base_json();
  j["mdp"] = {{"bound", 15}};
  j["sweep"] = {{"pc", {0.1, 0.2, 0.3}}};
  const RunConfig a = parse_config(j.dump());
  const std::string dumped = dump_config(a);
  const RunConfig b = parse_config(dumped);
  CHECK(dump_config(b) == dumped);
  CHECK(config_hash(a) == config_hash(b));

  json j2 = base_json();
  j2["sim"]["seed"] = 8;
  CHECK(config_hash(parse_config(j2.dump())) != config_hash(a));
}

TEST_CASE("errors name the offending key") {
  SUBCASE("invalid probability") {
    json j = base_json();
    j["channel"]["ps"] = 1.3;
    try {
      (void)parse_config(j.dump());
      FAIL("expected an error");
    } catch (const std::invalid_argument& e) {
      const std::string msg = e.what();
      CHECK(msg.find("channel.ps") != std::string::npos);
      CHECK(msg.find("1.3") != std::string::npos);
    }
  }

  SUBCASE("unknown keys") {
    json j = base_json();
    j["plant"]["Z"] = 1;
    expect_error_naming(j, "plant.Z");
    j = base_json();
    j["frobnicate"] = true;
    expect_error_naming(j, "frobnicate");
    j = base_json();
    j["sim"]["reps"] = 3;
    expect_error_naming(j, "sim.reps");
  }

  SUBCASE("missing keys") {
    json j = base_json();
    j["plant"].erase("K");
    expect_error_naming(j, "plant.K");
    j = base_json();
    j["sim"].erase("x0");
    expect_error_naming(j, "sim.x0");
  }

  SUBCASE("channel kind mismatches") {
    json j = base_json();
    j["channel"]["omega"] = {0.1};
    expect_error_naming(j, "channel.omega");
    j = base_json();
    j["channel"] = {{"kind", "fading"}, {"omega", {0.1}}, {"xi", {0.1}},
                    {"Ds", {{1.0}}}};
    expect_error_naming(j, "channel.Dc");
    j = base_json();
    j["channel"]["kind"] = "laser";
    expect_error_naming(j, "channel.kind");
  }

  SUBCASE("malformed values") {
    json j = base_json();
    j["plant"]["A"] = {{1.0, 2.0}, {3.0}};
    expect_error_naming(j, "plant.A");
    j = base_json();
    j["plant"]["v"] = 0;
    expect_error_naming(j, "plant.v");
    j = base_json();
    j["sim"]["K"] = 0;
    expect_error_naming(j, "sim.K");
    j = base_json();
    j["sim"]["seed"] = -4;
    expect_error_naming(j, "sim.seed");
    j = base_json();
    j["sim"]["x0"] = {1.0};
    expect_error_naming(j, "sim.x0");
    j = base_json();
    j["mdp"] = {{"tol", 0.0}};
    expect_error_naming(j, "mdp.tol");
    j = base_json();
    j["policy"]["kind"] = "optimall";
    expect_error_naming(j, "policy.kind");
  }

  SUBCASE("sweep validation") {
    json j = base_json();
    j["sweep"] = {{"pc", {0.1, 1.5}}};
    expect_error_naming(j, "sweep.pc");
    j = base_json();
    j["sweep"] = {{"v", {0}}};
    expect_error_naming(j, "sweep.v");
    j = base_json();
    j["sweep"] = {{"step", 0.1}};
    expect_error_naming(j, "sweep.step");
    j = base_json();
    j["channel"] = {{"kind", "fading"}, {"omega", {0.1}}, {"xi", {0.1}},
                    {"Ds", {{1.0}}}, {"Dc", {{1.0}}}};
    j["sweep"] = {{"pc", {0.1}}};
    expect_error_naming(j, "sweep");
  }

  SUBCASE("unparseable text") {
    CHECK_THROWS_AS((void)parse_config("{not json"), std::invalid_argument);
  }
}

TEST_CASE("build_plant surfaces model validation under the config prefix") {
  json j = base_json();
  j["plant"]["v"] = 2;  // deadbeat horizon for this (B, K) is 1, not 2
  const RunConfig cfg = parse_config(j.dump());
  try {
    (void)build_plant(cfg);
    FAIL("expected an error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("plant.v") != std::string::npos);
  }
}

TEST_CASE("sweep grids parse into the config") {
  json j = base_json();
  j["sweep"] = {{"ps", {0.1, 0.2}}, {"pc", {0.1, 0.3, 0.5}}, {"v", {2, 3}}};
  const RunConfig cfg = parse_config(j.dump());
  CHECK(cfg.sweep_ps == std::vector<double>{0.1, 0.2});
  CHECK(cfg.sweep_pc == std::vector<double>{0.1, 0.3, 0.5});
  CHECK(cfg.sweep_v == std::vector<int>{2, 3});
  CHECK(cfg.has_sweep());
}
