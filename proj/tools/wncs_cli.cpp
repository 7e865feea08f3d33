#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wncs/config.hpp"
#include "wncs/mdp.hpp"
#include "wncs/policies.hpp"
#include "wncs/simulator.hpp"
#include "wncs/stability.hpp"

using namespace wncs;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kToolVersion = "0.1.0";

#ifndef WNCS_PRESET_DIR
#define WNCS_PRESET_DIR "configs"
#endif

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string hash_hex(uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

struct RunContext {
  RunConfig cfg;
  std::string config_source;
  fs::path out_dir;
  std::vector<std::string> files;
  std::map<std::string, double> wall_ms;

  std::ofstream open_file(const std::string& name) {
    files.push_back(name);
    std::ofstream os(out_dir / name, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + (out_dir / name).string());
    return os;
  }

  std::vector<std::string> csv_header(const std::string& extra = "") const {
    std::vector<std::string> lines = {"config_hash=" + hash_hex(config_hash(cfg)),
                                      "seed=" + std::to_string(cfg.seed),
                                      "tool_version=" + std::string(kToolVersion)};
    if (!extra.empty()) lines.push_back(extra);
    return lines;
  }

  void write_manifest(const std::string& command) {
    files.push_back("manifest.json");
    json m;
    m["command"] = command;
    m["config_source"] = config_source;
    m["config_hash"] = hash_hex(config_hash(cfg));
    m["seed"] = cfg.seed;
    m["tool_version"] = kToolVersion;
    m["out_dir"] = out_dir.string();
    m["files"] = files;
    m["wall_ms"] = wall_ms;
    m["config"] = json::parse(dump_config(cfg));
    std::ofstream os(out_dir / "manifest.json", std::ios::binary);
    os << m.dump(2) << "\n";
  }
};

struct SolveArtifacts {
  TruncatedSpace space;
  RviResult result;
};

SolveArtifacts solve_mdp(const RunConfig& cfg, const PlantModel& p, const Channel& ch) {
  SolveArtifacts art;
  if (const auto* mk = std::get_if<MarkovChannel>(&ch))
    art.space = TruncatedSpace::make(cfg.bound, cfg.v, mk->states(Link::Up),
                                     mk->states(Link::Down));
  else
    art.space = TruncatedSpace::make(cfg.bound, cfg.v);
  const FTable f(p, cfg.bound);
  const Kernel k = build_kernel(art.space, p, ch, f);
  art.result = solve_rvi(k, cfg.tol, cfg.max_iter);
  art.result.policy.bound = cfg.bound;
  art.result.policy.v = cfg.v;
  return art;
}

void write_solve_outputs(RunContext& ctx, const SolveArtifacts& art) {
  {
    auto os = ctx.open_file("policy.csv");
    write_policy_csv(os, art.space, art.result.policy,
                     ctx.csv_header("gain=" + fmt(art.result.gain)));
  }
  json rep;
  rep["gain"] = art.result.gain;
  rep["iterations"] = art.result.iterations;
  rep["residual"] = art.result.residual;
  rep["converged"] = art.result.converged;
  rep["states"] = art.space.n_states;
  rep["bound"] = ctx.cfg.bound;
  rep["v"] = ctx.cfg.v;
  rep["config_hash"] = hash_hex(config_hash(ctx.cfg));
  rep["seed"] = ctx.cfg.seed;
  auto os = ctx.open_file("solve_report.json");
  os << rep.dump(2) << "\n";
}

std::vector<std::string> policy_kinds(const RunConfig& cfg) {
  if (cfg.policy_kind == "all")
    return {"full_duplex", "optimal", "persistent", "round_robin"};
  return {cfg.policy_kind};
}

Policy make_policy(const std::string& kind, const SolveArtifacts* solved) {
  if (kind == "persistent") return PersistentPolicy{};
  if (kind == "round_robin") return RoundRobinPolicy{Action::Sense};
  if (kind == "full_duplex") return FullDuplexPolicy{};
  if (kind == "optimal") {
    if (!solved) throw std::runtime_error("optimal policy requested without a solve");
    return OptimalPolicy{&solved->space, &solved->result.policy};
  }
  throw std::invalid_argument("config: policy.kind: unknown policy \"" + kind + "\"");
}

int run_check(RunContext& ctx) {
  const PlantModel p = build_plant(ctx.cfg);
  json rep;
  rep["config_hash"] = hash_hex(config_hash(ctx.cfg));
  try {
    const StabilityReport r = stability_report(p, ctx.cfg.channel);
    char line[160];
    std::snprintf(line, sizeof line, "rho^2(A) = %.6f", r.rho_sq);
    std::cout << line << "\n";
    if (!r.fading) {
      const auto& st = std::get<StaticChannel>(ctx.cfg.channel);
      const double worst = std::max(st.p_s, st.p_c);
      std::snprintf(line, sizeof line, "optimal/persistent: %s (%.4f %s %.4f)",
                    to_string(r.optimal), worst,
                    r.optimal == Verdict::Stabilizable ? "<" : ">=", r.threshold_optimal);
      std::cout << line << "\n";
      std::snprintf(line, sizeof line, "round_robin: %s (%.4f %s %.4f)",
                    to_string(r.naive), worst,
                    r.naive == Verdict::Stabilizable ? "<" : ">=", r.threshold_naive);
      std::cout << line << "\n";
    } else {
      std::snprintf(line, sizeof line,
                    "optimal/persistent: %s (necessary %s, sufficient %s; threshold %.4f)",
                    to_string(r.optimal), r.necessary_met ? "met" : "not met",
                    r.sufficient_met ? "met" : "not met", r.threshold_optimal);
      std::cout << line << "\n";
      std::cout << "round_robin: " << to_string(r.naive)
                << " (no closed-form condition for fading links)\n";
    }
    rep["applicable"] = true;
    rep["rho_sq"] = r.rho_sq;
    rep["threshold_optimal"] = r.threshold_optimal;
    rep["threshold_naive"] = r.threshold_naive;
    rep["optimal"] = to_string(r.optimal);
    rep["round_robin"] = to_string(r.naive);
    rep["fading"] = r.fading;
    rep["necessary_met"] = r.necessary_met;
    rep["sufficient_met"] = r.sufficient_met;
  } catch (const std::invalid_argument&) {
    std::cout << "stability thresholds need a finite-step controllable plant; "
                 "not applicable to this model\n";
    rep["applicable"] = false;
  }
  auto os = ctx.open_file("stability.json");
  os << rep.dump(2) << "\n";
  ctx.write_manifest("check");
  return 0;
}

int run_solve(RunContext& ctx) {
  const PlantModel p = build_plant(ctx.cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const SolveArtifacts art = solve_mdp(ctx.cfg, p, ctx.cfg.channel);
  ctx.wall_ms["solve"] = ms_since(t0);
  write_solve_outputs(ctx, art);
  ctx.write_manifest("solve");
  if (!art.result.converged) {
    std::cerr << "solver did not converge: residual " << fmt(art.result.residual)
              << " after " << art.result.iterations << " iterations\n";
    return 3;
  }
  std::cout << "gain " << fmt(art.result.gain) << " in " << art.result.iterations
            << " iterations over " << art.space.n_states << " states\n";
  return 0;
}

ExperimentConfig sim_config(const RunConfig& cfg, const PlantModel& p,
                            const Channel& ch, const Policy& pol, bool trace) {
  ExperimentConfig ec;
  ec.plant = &p;
  ec.channel = ch;
  ec.policy = pol;
  ec.horizon = cfg.horizon;
  ec.replications = cfg.replications;
  ec.seed = cfg.seed;
  ec.x0 = cfg.x0;
  ec.div_window = cfg.div_window;
  ec.div_growth = cfg.div_growth;
  ec.collect_trace = trace;
  return ec;
}

int run_simulate(RunContext& ctx) {
  const PlantModel p = build_plant(ctx.cfg);
  const auto kinds = policy_kinds(ctx.cfg);
  const bool wants_optimal =
      std::find(kinds.begin(), kinds.end(), "optimal") != kinds.end();

  std::optional<SolveArtifacts> solved;
  if (wants_optimal) {
    const auto t0 = std::chrono::steady_clock::now();
    solved = solve_mdp(ctx.cfg, p, ctx.cfg.channel);
    ctx.wall_ms["solve"] = ms_since(t0);
    write_solve_outputs(ctx, *solved);
    if (!solved->result.converged) {
      std::cerr << "solver did not converge: residual " << fmt(solved->result.residual)
                << "\n";
      ctx.write_manifest("simulate");
      return 3;
    }
  }

  json summary;
  summary["config_hash"] = hash_hex(config_hash(ctx.cfg));
  summary["seed"] = ctx.cfg.seed;
  if (std::holds_alternative<MarkovChannel>(ctx.cfg.channel))
    summary["initial_channel_state"] = 0;
  if (solved) summary["gain"] = solved->result.gain;

  bool any_diverged = false;
  for (const auto& kind : kinds) {
    const Policy pol = make_policy(kind, solved ? &*solved : nullptr);
    const bool trace = kind == "persistent";
    const auto t0 = std::chrono::steady_clock::now();
    const SimResult res = run(sim_config(ctx.cfg, p, ctx.cfg.channel, pol, trace));
    ctx.wall_ms["simulate_" + kind] = ms_since(t0);

    {
      auto os = ctx.open_file("running_avg_" + kind + ".csv");
      for (const auto& l : ctx.csv_header("policy=" + kind)) os << "# " << l << "\n";
      os << "slot,mean,se\n";
      for (size_t i = 0; i < res.sample_slots.size(); ++i)
        os << res.sample_slots[i] << ',' << fmt(res.running_mean[i]) << ','
           << fmt(res.running_se[i]) << "\n";
    }

    json e;
    e["mean_cost"] = res.mean_cost;
    e["stderr"] = res.stderr_cost;
    e["sense_frac"] = res.sense_frac;
    e["control_frac"] = res.control_frac;
    e["both_frac"] = res.both_frac;
    e["diverged"] = res.diverged;
    e["replications"] = ctx.cfg.replications;
    e["K"] = ctx.cfg.horizon;
    if (trace) {
      try {
        const CycleStats st = cycle_stats(res.trace_decisions, res.trace_costs);
        e["cycles"] = {{"count", st.cycles},
                       {"mean_cost", st.mean_cost},
                       {"mean_len", st.mean_len},
                       {"ratio", st.ratio}};
      } catch (const std::runtime_error&) {
        // too few complete cycles to report
      }
    }
    summary["policies"][kind] = e;
    any_diverged = any_diverged || res.diverged;
    std::cout << kind << ": mean cost " << fmt(res.mean_cost) << " +- "
              << fmt(res.stderr_cost) << (res.diverged ? " [diverged]" : "") << "\n";
  }

  {
    auto os = ctx.open_file("summary.json");
    os << summary.dump(2) << "\n";
  }
  ctx.write_manifest("simulate");
  return any_diverged ? 4 : 0;
}

int run_sweep(RunContext& ctx) {
  if (!ctx.cfg.has_sweep())
    throw std::invalid_argument("config: sweep: section required for the sweep command");
  const auto* st = std::get_if<StaticChannel>(&ctx.cfg.channel);
  if (!st)
    throw std::invalid_argument("config: sweep: static channel required");

  const std::vector<double> ps_grid =
      ctx.cfg.sweep_ps.empty() ? std::vector<double>{st->p_s} : ctx.cfg.sweep_ps;
  const std::vector<double> pc_grid =
      ctx.cfg.sweep_pc.empty() ? std::vector<double>{st->p_c} : ctx.cfg.sweep_pc;
  const std::vector<int> v_grid =
      ctx.cfg.sweep_v.empty() ? std::vector<int>{ctx.cfg.v} : ctx.cfg.sweep_v;
  const auto kinds = policy_kinds(ctx.cfg);
  const bool wants_optimal =
      std::find(kinds.begin(), kinds.end(), "optimal") != kinds.end();

  auto os = ctx.open_file("sweep.csv");
  for (const auto& l : ctx.csv_header()) os << "# " << l << "\n";
  os << "ps,pc,v,policy,mean_cost,stderr,diverged\n";

  bool any_diverged = false;
  const auto t0 = std::chrono::steady_clock::now();
  for (const int v : v_grid) {
    RunConfig point_cfg = ctx.cfg;
    point_cfg.v = v;
    const PlantModel p = build_plant(point_cfg);
    for (const double ps : ps_grid)
      for (const double pc : pc_grid) {
        const Channel ch = StaticChannel{ps, pc};
        std::optional<SolveArtifacts> solved;
        if (wants_optimal) {
          solved = solve_mdp(point_cfg, p, ch);
          if (!solved->result.converged) {
            std::cerr << "solver did not converge at ps=" << fmt(ps) << " pc=" << fmt(pc)
                      << " v=" << v << "\n";
            return 3;
          }
        }
        for (const auto& kind : kinds) {
          const Policy pol = make_policy(kind, solved ? &*solved : nullptr);
          const SimResult res = run(sim_config(point_cfg, p, ch, pol, false));
          os << fmt(ps) << ',' << fmt(pc) << ',' << v << ',' << kind << ','
             << fmt(res.mean_cost) << ',' << fmt(res.stderr_cost) << ','
             << (res.diverged ? 1 : 0) << "\n";
          any_diverged = any_diverged || res.diverged;
        }
      }
  }
  ctx.wall_ms["sweep"] = ms_since(t0);
  os.close();
  ctx.write_manifest("sweep");
  return any_diverged ? 4 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"uplink-downlink transmission scheduling experiments"};
  app.require_subcommand(1);
  app.fallthrough();  // let --config etc. appear after the subcommand

  std::string config_path, preset, out_dir = "out";
  long long seed_override = -1;
  app.add_option("--config", config_path, "path to an experiment config (json)");
  app.add_option("--preset", preset,
                 "bundled config name (fig3..fig9), looked up in " WNCS_PRESET_DIR);
  app.add_option("--out-dir", out_dir, "output directory (created if needed)");
  app.add_option("--seed", seed_override, "override sim.seed");

  auto* c_solve = app.add_subcommand("solve", "solve the scheduling MDP, write the policy");
  auto* c_sim = app.add_subcommand("simulate", "closed-loop Monte-Carlo runs");
  auto* c_check = app.add_subcommand("check", "stabilizability report");
  auto* c_sweep = app.add_subcommand("sweep", "grid of simulations over ps/pc/v");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    RunContext ctx;
    if (config_path.empty() == preset.empty()) {
      std::cerr << "exactly one of --config or --preset is required\n";
      return 2;
    }
    if (!preset.empty()) {
      ctx.config_source = std::string(WNCS_PRESET_DIR) + "/" + preset + ".json";
      ctx.cfg = load_config_file(ctx.config_source);
    } else {
      ctx.config_source = config_path;
      ctx.cfg = load_config_file(config_path);
    }
    if (seed_override >= 0) ctx.cfg.seed = static_cast<uint64_t>(seed_override);
    ctx.out_dir = out_dir;
    fs::create_directories(ctx.out_dir);

    if (c_check->parsed()) return run_check(ctx);
    if (c_solve->parsed()) return run_solve(ctx);
    if (c_sim->parsed()) return run_simulate(ctx);
    if (c_sweep->parsed()) return run_sweep(ctx);
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
