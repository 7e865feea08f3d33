#include "wncs/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace wncs {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& key, const std::string& msg) {
  throw std::invalid_argument("config: " + key + ": " + msg);
}

void check_keys(const json& j, const std::string& section,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    const bool known =
        std::any_of(allowed.begin(), allowed.end(),
                    [&](const char* k) { return item.key() == k; });
    if (!known)
      fail(section.empty() ? item.key() : section + "." + item.key(), "unknown key");
  }
}

const json& require(const json& j, const std::string& section, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) fail(section + "." + key, "missing required key");
  return *it;
}

double number_at(const json& j, const std::string& key) {
  if (!j.is_number()) fail(key, "expected a number");
  return j.get<double>();
}

long integer_at(const json& j, const std::string& key) {
  if (!j.is_number_integer()) fail(key, "expected an integer");
  return j.get<long>();
}

double prob_at(const json& j, const std::string& key) {
  const double p = number_at(j, key);
  if (!(p > 0.0 && p < 1.0))
    fail(key, "invalid probability " + json(p).dump());
  return p;
}

Mat matrix_at(const json& j, const std::string& key) {
  if (!j.is_array() || j.empty()) fail(key, "expected a nested array");
  const int rows = static_cast<int>(j.size());
  if (!j[0].is_array() || j[0].empty()) fail(key, "expected a nested array");
  const int cols = static_cast<int>(j[0].size());
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (!j[i].is_array() || static_cast<int>(j[i].size()) != cols)
      fail(key, "rows must all have the same length");
    for (int c = 0; c < cols; ++c) m(i, c) = number_at(j[i][c], key);
  }
  return m;
}

Vec vector_at(const json& j, const std::string& key) {
  if (!j.is_array() || j.empty()) fail(key, "expected an array of numbers");
  Vec v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[i] = number_at(j[i], key);
  return v;
}

std::vector<double> prob_list_at(const json& j, const std::string& key) {
  if (!j.is_array() || j.empty()) fail(key, "expected an array of probabilities");
  std::vector<double> v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[i] = prob_at(j[i], key);
  return v;
}

json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows; ++i) {
    json r = json::array();
    for (int c = 0; c < m.cols; ++c) r.push_back(m(i, c));
    rows.push_back(r);
  }
  return rows;
}

void parse_channel(const json& j, RunConfig& cfg) {
  check_keys(j, "channel", {"kind", "ps", "pc", "Ds", "Dc", "omega", "xi"});
  const std::string kind = require(j, "channel", "kind").get<std::string>();
  if (kind == "static") {
    for (const char* k : {"Ds", "Dc", "omega", "xi"})
      if (j.contains(k)) fail(std::string("channel.") + k, "not valid for a static channel");
    StaticChannel ch;
    ch.p_s = prob_at(require(j, "channel", "ps"), "channel.ps");
    ch.p_c = prob_at(require(j, "channel", "pc"), "channel.pc");
    validate(ch);
    cfg.channel = ch;
  } else if (kind == "fading") {
    for (const char* k : {"ps", "pc"})
      if (j.contains(k)) fail(std::string("channel.") + k, "not valid for a fading channel");
    MarkovChannel ch;
    ch.omega = prob_list_at(require(j, "channel", "omega"), "channel.omega");
    ch.xi = prob_list_at(require(j, "channel", "xi"), "channel.xi");
    ch.D_s = matrix_at(require(j, "channel", "Ds"), "channel.Ds");
    ch.D_c = matrix_at(require(j, "channel", "Dc"), "channel.Dc");
    validate(ch);
    cfg.channel = ch;
  } else {
    fail("channel.kind", "must be \"static\" or \"fading\"");
  }
}

void parse_sweep(const json& j, RunConfig& cfg) {
  check_keys(j, "sweep", {"ps", "pc", "v"});
  if (j.contains("ps")) cfg.sweep_ps = prob_list_at(j["ps"], "sweep.ps");
  if (j.contains("pc")) cfg.sweep_pc = prob_list_at(j["pc"], "sweep.pc");
  if (j.contains("v")) {
    if (!j["v"].is_array() || j["v"].empty()) fail("sweep.v", "expected an array");
    for (const auto& e : j["v"]) {
      const long v = integer_at(e, "sweep.v");
      if (v < 1) fail("sweep.v", "entries must be at least 1");
      cfg.sweep_v.push_back(static_cast<int>(v));
    }
  }
  if (cfg.has_sweep() && !std::holds_alternative<StaticChannel>(cfg.channel))
    fail("sweep", "parameter sweeps support static channels only");
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  if (!root.is_object()) throw std::invalid_argument("config: top level must be an object");
  check_keys(root, "", {"plant", "channel", "policy", "sim", "mdp", "sweep"});

  RunConfig cfg;

  const json& plant = require(root, "config", "plant");
  check_keys(plant, "plant", {"A", "B", "K", "Q", "R", "v"});
  cfg.A = matrix_at(require(plant, "plant", "A"), "plant.A");
  cfg.B = matrix_at(require(plant, "plant", "B"), "plant.B");
  cfg.K = matrix_at(require(plant, "plant", "K"), "plant.K");
  cfg.Q = matrix_at(require(plant, "plant", "Q"), "plant.Q");
  cfg.R = matrix_at(require(plant, "plant", "R"), "plant.R");
  const long v = integer_at(require(plant, "plant", "v"), "plant.v");
  if (v < 1) fail("plant.v", "must be at least 1");
  cfg.v = static_cast<int>(v);

  parse_channel(require(root, "config", "channel"), cfg);

  const json& policy = require(root, "config", "policy");
  check_keys(policy, "policy", {"kind"});
  cfg.policy_kind = require(policy, "policy", "kind").get<std::string>();
  const auto& kinds = valid_policy_kinds();
  if (std::find(kinds.begin(), kinds.end(), cfg.policy_kind) == kinds.end())
    fail("policy.kind", "unknown policy \"" + cfg.policy_kind + "\"");

  const json& sim = require(root, "config", "sim");
  check_keys(sim, "sim",
             {"K", "replications", "seed", "x0", "div_window", "div_growth"});
  cfg.horizon = integer_at(require(sim, "sim", "K"), "sim.K");
  if (cfg.horizon < 1) fail("sim.K", "must be at least 1");
  cfg.replications =
      static_cast<int>(integer_at(require(sim, "sim", "replications"), "sim.replications"));
  if (cfg.replications < 1) fail("sim.replications", "must be at least 1");
  const json& jseed = require(sim, "sim", "seed");
  if (!jseed.is_number_integer() || jseed.get<long long>() < 0)
    fail("sim.seed", "expected a nonnegative integer");
  cfg.seed = jseed.get<uint64_t>();
  cfg.x0 = vector_at(require(sim, "sim", "x0"), "sim.x0");
  if (sim.contains("div_window")) {
    cfg.div_window = static_cast<int>(integer_at(sim["div_window"], "sim.div_window"));
    if (cfg.div_window < 1) fail("sim.div_window", "must be at least 1");
  }
  if (sim.contains("div_growth")) {
    cfg.div_growth = number_at(sim["div_growth"], "sim.div_growth");
    if (cfg.div_growth <= 1.0) fail("sim.div_growth", "must exceed 1");
  }

  if (root.contains("mdp")) {
    const json& mdp = root["mdp"];
    check_keys(mdp, "mdp", {"bound", "tol", "max_iter"});
    if (mdp.contains("bound")) {
      cfg.bound = static_cast<int>(integer_at(mdp["bound"], "mdp.bound"));
      if (cfg.bound < 3) fail("mdp.bound", "must be at least 3");
    }
    if (mdp.contains("tol")) {
      cfg.tol = number_at(mdp["tol"], "mdp.tol");
      if (cfg.tol <= 0.0) fail("mdp.tol", "must be positive");
    }
    if (mdp.contains("max_iter")) {
      cfg.max_iter = integer_at(mdp["max_iter"], "mdp.max_iter");
      if (cfg.max_iter < 1) fail("mdp.max_iter", "must be at least 1");
    }
  }

  if (root.contains("sweep")) parse_sweep(root["sweep"], cfg);

  // dimensional coherence against the plant (full validation in build_plant)
  if (cfg.A.rows != cfg.A.cols) fail("plant.A", "must be a square matrix");
  if (static_cast<int>(cfg.x0.size()) != cfg.A.rows)
    fail("sim.x0", "dimension does not match plant.A");
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const RunConfig& cfg) {
  json root;
  root["plant"] = {{"A", matrix_to_json(cfg.A)}, {"B", matrix_to_json(cfg.B)},
                   {"K", matrix_to_json(cfg.K)}, {"Q", matrix_to_json(cfg.Q)},
                   {"R", matrix_to_json(cfg.R)}, {"v", cfg.v}};
  if (const auto* st = std::get_if<StaticChannel>(&cfg.channel)) {
    root["channel"] = {{"kind", "static"}, {"ps", st->p_s}, {"pc", st->p_c}};
  } else {
    const auto& mk = std::get<MarkovChannel>(cfg.channel);
    root["channel"] = {{"kind", "fading"},
                       {"omega", mk.omega},
                       {"xi", mk.xi},
                       {"Ds", matrix_to_json(mk.D_s)},
                       {"Dc", matrix_to_json(mk.D_c)}};
  }
  root["policy"] = {{"kind", cfg.policy_kind}};
  root["sim"] = {{"K", cfg.horizon},       {"replications", cfg.replications},
                 {"seed", cfg.seed},       {"x0", cfg.x0},
                 {"div_window", cfg.div_window}, {"div_growth", cfg.div_growth}};
  root["mdp"] = {{"bound", cfg.bound}, {"tol", cfg.tol}, {"max_iter", cfg.max_iter}};
  if (cfg.has_sweep()) {
    json sw = json::object();
    if (!cfg.sweep_ps.empty()) sw["ps"] = cfg.sweep_ps;
    if (!cfg.sweep_pc.empty()) sw["pc"] = cfg.sweep_pc;
    if (!cfg.sweep_v.empty()) sw["v"] = cfg.sweep_v;
    root["sweep"] = sw;
  }
  return root.dump(2) + "\n";
}

uint64_t config_hash(const RunConfig& cfg) {
  const std::string s = dump_config(cfg);
  uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

PlantModel build_plant(const RunConfig& cfg) {
  try {
    return make_plant(cfg.A, cfg.B, cfg.K, cfg.Q, cfg.R, cfg.v);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
}

const std::vector<std::string>& valid_policy_kinds() {
  static const std::vector<std::string> kinds = {
      "optimal", "persistent", "round_robin", "full_duplex", "all"};
  return kinds;
}

}  // namespace wncs
