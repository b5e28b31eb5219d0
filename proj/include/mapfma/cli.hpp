#pragma once

#include <CLI11.hpp>

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mapfma/adversary.hpp"
#include "mapfma/engine.hpp"
#include "mapfma/hardness.hpp"
#include "mapfma/instances.hpp"
#include "mapfma/io.hpp"
#include "mapfma/joint_solver.hpp"
#include "mapfma/model.hpp"
#include "mapfma/worst_case.hpp"

namespace mapfma {

namespace cli {

inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kUsage = 2;

/// Turn from which each agent stays on its target to the end of `s`.
inline std::vector<int> arrival_turns(const Instance& inst, const Schedule& s) {
  std::vector<int> out;
  for (AgentId a = 0; a < static_cast<AgentId>(s.num_agents()); ++a) {
    int t = s.length();
    while (t > 0 && s.at(a, t - 1) == inst.agents[a].target) --t;
    out.push_back(s.at(a, t) == inst.agents[a].target ? t : -1);
  }
  return out;
}

inline void emit_or_write(std::ostream& out, const std::string& path, const std::string& text) {
  if (path.empty()) {
    out << text;
  } else {
    write_file(path, text);
  }
}

struct Loaded {
  Instance instance;
  Schedule schedule;
};

inline Loaded load(const std::string& instance_path, const std::string& schedule_path) {
  Loaded l{parse_instance(read_file(instance_path)), {}};
  l.schedule = parse_schedule(read_file(schedule_path), l.instance);
  return l;
}

inline TieBreakPolicy make_policy(const std::string& kind, std::uint64_t seed) {
  try {
    return {parse_policy_kind(kind), seed};
  } catch (const Error& e) {
    throw ParseError(0, e.what());
  }
}

inline Protocol make_protocol(const std::string& name) {
  try {
    return parse_protocol(name);
  } catch (const Error& e) {
    throw ParseError(0, e.what());
  }
}

inline void print_verdict(std::ostream& out, const Instance& inst, const FeasibilityVerdict& v) {
  if (v) {
    out << "feasible yes\n";
    return;
  }
  out << "feasible no " << v.rule << " turn " << v.turn;
  for (AgentId a : v.agents) out << " " << inst.agent_label(a);
  for (VertexId x : v.vertices) out << " " << inst.graph.label(x);
  out << "\n";
}

}  // namespace cli

/// Entry point of the `mapfma` tool. Exit codes: 0 success, 1 a domain
/// failure (infeasible, deadlock, refusal, failed audit), 2 bad usage or
/// malformed input.
inline int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  using namespace cli;
  CLI::App app{"Multiagent path finding with malfunctioning agents", "mapfma"};
  app.require_subcommand(1);
  std::function<int()> action;

  // gen
  std::string gen_kind, gen_instance, gen_schedule;
  int gen_rows = 3, gen_cols = 3, gen_agents = 2, gen_horizon = 12;
  std::uint64_t gen_seed = 1;
  auto* gen = app.add_subcommand("gen", "Write a built-in or random grid instance and its optimal schedule");
  gen->add_option("kind", gen_kind, "fig1, fig2 or grid")->required()->check(CLI::IsMember({"fig1", "fig2", "grid"}));
  gen->add_option("--rows", gen_rows, "grid rows");
  gen->add_option("--cols", gen_cols, "grid columns");
  gen->add_option("--agents", gen_agents, "grid agents");
  gen->add_option("--seed", gen_seed, "grid seed");
  gen->add_option("--horizon", gen_horizon, "grid solver horizon");
  gen->add_option("--instance", gen_instance, "instance output path (default stdout)");
  gen->add_option("--schedule", gen_schedule, "schedule output path (default stdout)");
  gen->callback([&] {
    action = [&] {
      GeneratedInstance g = gen_kind == "fig1"   ? gen_fig1()
                            : gen_kind == "fig2" ? gen_fig2()
                                                 : gen_grid(gen_rows, gen_cols, gen_agents, gen_seed, gen_horizon);
      emit_or_write(out, gen_instance, write_instance(g.instance));
      emit_or_write(out, gen_schedule, write_schedule(g.instance, g.schedule));
      return kOk;
    };
  });

  // solve
  std::string solve_instance, solve_out;
  int solve_horizon = 32;
  std::uint64_t solve_limit = kDefaultJointStateLimit;
  auto* solve = app.add_subcommand("solve", "Optimal schedule by joint breadth-first search");
  solve->add_option("--instance", solve_instance, "instance file")->required();
  solve->add_option("--horizon", solve_horizon, "largest makespan searched");
  solve->add_option("--limit", solve_limit, "cap on |V|^|A|");
  solve->add_option("--out", solve_out, "schedule output path (default stdout)");
  solve->callback([&] {
    action = [&] {
      Instance inst = parse_instance(read_file(solve_instance));
      auto sol = solve_optimal(inst, solve_horizon, solve_limit);
      if (!sol) {
        out << "status infeasible-within " << solve_horizon << "\n";
        return kFailure;
      }
      out << "status optimal\nmakespan " << sol->length() << "\n";
      if (solve_out.empty()) {
        out << write_schedule(inst, *sol);
      } else {
        write_file(solve_out, write_schedule(inst, *sol));
      }
      return kOk;
    };
  });

  // simulate
  std::string sim_instance, sim_schedule, sim_protocol = "cbm", sim_plan, sim_priorities, sim_policy = "lowest-id";
  std::string sim_trace;
  std::uint64_t sim_seed = 0;
  std::optional<int> sim_budget, sim_random_k;
  bool sim_spacetime = false;
  auto* simulate = app.add_subcommand("simulate", "Execute a schedule under a malfunction plan and protocol");
  simulate->add_option("--instance", sim_instance, "instance file")->required();
  simulate->add_option("--schedule", sim_schedule, "schedule file")->required();
  simulate->add_option("--protocol", sim_protocol, "nocomm, cbm, ucbm or ccbm");
  simulate->add_option("--plan", sim_plan, "malfunctions turn:agent,...");
  simulate->add_option("--random-k", sim_random_k, "draw k malfunctions from --seed instead of --plan");
  simulate->add_option("--priority", sim_priorities, "contention winners turn:vertex:agent,...");
  simulate->add_option("--policy", sim_policy, "lowest-id, highest-d or seeded-random");
  simulate->add_option("--seed", sim_seed, "seed for the policy and --random-k");
  simulate->add_option("--budget", sim_budget, "turn budget (default mu + k + 2|V|)");
  simulate->add_option("--trace", sim_trace, "write the phase trace here");
  simulate->add_flag("--spacetime", sim_spacetime, "print the space-time table");
  simulate->callback([&] {
    action = [&] {
      auto [inst, sched] = load(sim_instance, sim_schedule);
      const Protocol protocol = make_protocol(sim_protocol);
      const TieBreakPolicy policy = make_policy(sim_policy, sim_seed);
      if (sim_random_k && !sim_plan.empty()) throw ParseError(0, "--plan and --random-k are exclusive");
      MalfunctionPlan plan = sim_random_k ? random_plan(inst, sched, *sim_random_k, sim_seed)
                                          : parse_plan(sim_plan, inst);
      RunOptions opt;
      opt.priorities = parse_priorities(sim_priorities, inst);
      opt.budget = sim_budget;
      RunResult res = run(inst, sched, plan, protocol, policy, opt);
      out << "outcome " << to_string(res.outcome) << " " << res.outcome_turn << "\n";
      out << "makespan " << res.makespan << "\n";
      out << "plan " << format_plan(plan, inst) << "\n";
      const auto arrivals = arrival_turns(inst, res.final_schedule);
      for (AgentId a = 0; a < static_cast<AgentId>(inst.num_agents()); ++a)
        out << "agent " << inst.agent_label(a) << " delays " << res.delay_counts[a] << " arrival "
            << (res.outcome == Outcome::Completed ? arrivals[a] : -1) << "\n";
      if (res.unconsumed_events) out << "unconsumed " << res.unconsumed_events << "\n";
      if (sim_spacetime) out << emit_spacetime(inst, res);
      if (!sim_trace.empty()) write_file(sim_trace, write_trace(inst, sched, plan, protocol, policy, opt, res));
      return res.outcome == Outcome::Completed ? kOk : kFailure;
    };
  });

  // worstcase
  std::string wc_instance, wc_schedule, wc_protocol = "cbm", wc_policy = "lowest-id", wc_trace;
  int wc_k = 1;
  std::optional<int> wc_budget;
  std::size_t wc_nodes = WorstCaseLimits{}.node_limit;
  auto* worst = app.add_subcommand("worstcase", "Exhaustive worst-case adversary on a small instance");
  worst->add_option("--instance", wc_instance, "instance file")->required();
  worst->add_option("--schedule", wc_schedule, "schedule file")->required();
  worst->add_option("--protocol", wc_protocol, "nocomm, cbm, ucbm or ccbm");
  worst->add_option("--k", wc_k, "malfunction budget");
  worst->add_option("--budget", wc_budget, "turn budget");
  worst->add_option("--policy", wc_policy, "lowest-id or highest-d");
  worst->add_option("--node-limit", wc_nodes, "search node cap");
  worst->add_option("--trace", wc_trace, "write the witness trace here");
  worst->callback([&] {
    action = [&] {
      auto [inst, sched] = load(wc_instance, wc_schedule);
      const Protocol protocol = make_protocol(wc_protocol);
      const TieBreakPolicy policy = make_policy(wc_policy, 0);
      WorstCaseLimits limits;
      limits.node_limit = wc_nodes;
      auto r = worst_case_search(inst, sched, protocol, wc_k, wc_budget, policy, limits);
      if (r.deadlock) {
        out << "worst " << to_string(r.replay.outcome) << " " << r.replay.outcome_turn << "\n";
      } else {
        out << "worst makespan " << r.makespan << "\n";
      }
      out << "plan " << format_plan(r.plan, inst) << "\n";
      out << "priorities " << format_priorities(r.priorities, inst) << "\n";
      out << "max-delays " << r.replay.max_delay_count() << "\n";
      out << "nodes " << r.nodes << "\n";
      if (!wc_trace.empty()) {
        RunOptions opt;
        opt.priorities = r.priorities;
        opt.budget = r.replay.budget;
        write_file(wc_trace, write_trace(inst, sched, r.plan, protocol, policy, opt, r.replay));
      }
      return r.deadlock ? kFailure : kOk;
    };
  });

  // verify
  std::string ver_instance, ver_schedule, ver_trace;
  auto* verify = app.add_subcommand("verify", "Check a schedule, and optionally replay a trace");
  verify->add_option("--instance", ver_instance, "instance file")->required();
  verify->add_option("--schedule", ver_schedule, "schedule file")->required();
  verify->add_option("--trace", ver_trace, "trace to replay byte for byte");
  verify->callback([&] {
    action = [&] {
      auto [inst, sched] = load(ver_instance, ver_schedule);
      auto w = verify_optimal_witness(inst, sched);
      print_verdict(out, inst, w.feasibility);
      out << "length " << sched.length() << " makespan " << inst.makespan << " lower-bound " << w.lower_bound
          << "\n";
      out << "optimal " << (w.kind == WitnessVerdict::Kind::OptimalByWitness ? "by-witness" : "undetermined")
          << "\n";
      bool ok = w.feasibility.feasible && sched.length() <= inst.makespan;
      if (!ver_trace.empty()) {
        const std::string text = read_file(ver_trace);
        TraceHeader h = parse_trace_header(text, inst);
        if (h.instance_hash != hex64(fnv1a64(write_instance(inst))) ||
            h.schedule_hash != hex64(fnv1a64(write_schedule(inst, sched)))) {
          out << "replay mismatch inputs\n";
          return kFailure;
        }
        MalfunctionPlan plan = parse_plan(h.plan, inst);
        RunOptions opt;
        opt.priorities = parse_priorities(h.priorities, inst);
        opt.budget = h.budget;
        RunResult res = run(inst, sched, plan, h.protocol, h.policy, opt);
        const std::string again = write_trace(inst, sched, plan, h.protocol, h.policy, opt, res);
        if (again == text) {
          out << "replay identical\n";
        } else {
          const auto a = detail::split(text, '\n');
          const auto b = detail::split(again, '\n');
          std::size_t i = 0;
          while (i < a.size() && i < b.size() && a[i] == b[i]) ++i;
          const std::string& line = i < a.size() ? a[i] : b[i];
          std::string where = "footer";
          if (!line.empty() && line[0] == 'T') where = "turn " + line.substr(1, line.find(' ') - 1);
          out << "replay diverges at " << where << " (line " << i + 1 << ")\n";
          ok = false;
        }
      }
      return ok ? kOk : kFailure;
    };
  });

  // sat-reduce
  std::string red_cnf, red_instance, red_schedule;
  auto* reduce = app.add_subcommand("sat-reduce", "Build the repair instance of a 3-CNF formula");
  reduce->add_option("--cnf", red_cnf, "DIMACS file")->required();
  reduce->add_option("--instance", red_instance, "instance output path");
  reduce->add_option("--schedule", red_schedule, "schedule output path");
  reduce->callback([&] {
    action = [&] {
      CnfFormula f = parse_dimacs(read_file(red_cnf));
      HardnessInstance h = build_hardness_instance(f);
      const auto audit = check_hardness_structure(h.layout, h.instance);
      out << "n " << f.n << "\nm " << f.m() << "\nmakespan " << h.instance.makespan << "\nvertices "
          << h.instance.graph.num_vertices() << "\nagents " << h.instance.num_agents() << "\nmax-degree "
          << h.instance.graph.max_degree() << "\nmalfunction " << h.malfunction.turn << ":"
          << h.instance.agent_label(h.malfunction.agents.front()) << "\n";
      out << "audit " << (audit.empty() ? "ok" : std::to_string(audit.size()) + " violation(s)") << "\n";
      for (const auto& v : audit) out << "violation " << v.rule << " " << v.detail << "\n";
      if (!red_instance.empty()) write_file(red_instance, write_instance(h.instance));
      if (!red_schedule.empty()) write_file(red_schedule, write_schedule(h.instance, h.schedule));
      return audit.empty() ? kOk : kFailure;
    };
  });

  // sat-repair
  std::string rep_cnf, rep_assignment, rep_out;
  auto* repair = app.add_subcommand("sat-repair", "Repair the reduction schedule from a truth assignment");
  repair->add_option("--cnf", rep_cnf, "DIMACS file")->required();
  repair->add_option("--assignment", rep_assignment, "literals such as 1,-2,3 (default: search)");
  repair->add_option("--out", rep_out, "repaired schedule output path");
  repair->callback([&] {
    action = [&] {
      CnfFormula f = parse_dimacs(read_file(rep_cnf));
      std::vector<bool> assignment;
      if (rep_assignment.empty()) {
        auto found = find_satisfying_assignment(f);
        if (!found) {
          out << "satisfiable no\n";
          return kFailure;
        }
        assignment = *found;
      } else {
        assignment = parse_assignment(rep_assignment, f.n);
      }
      HardnessInstance h = build_hardness_instance(f);
      Schedule s = apply_repair(h, repair_from_assignment(h.layout, f, assignment));
      const auto verdict = check_feasible(h.instance, s);
      out << "assignment " << format_assignment(assignment) << "\n";
      out << "satisfies " << (satisfies(f, assignment) ? "yes" : "no") << "\n";
      print_verdict(out, h.instance, verdict);
      out << "length " << s.length() << " makespan " << h.instance.makespan << "\n";
      if (!rep_out.empty()) write_file(rep_out, write_schedule(h.instance, s));
      return verdict.feasible && s.length() == h.instance.makespan ? kOk : kFailure;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  try {
    return action();
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace mapfma
