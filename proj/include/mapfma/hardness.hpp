#pragma once

#include <algorithm>
#include <map>
#include <stdexcept>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mapfma/model.hpp"

namespace mapfma {

struct Literal {
  int var = 1;  // 1-based
  bool positive = true;

  friend bool operator==(const Literal&, const Literal&) = default;
};

struct CnfFormula {
  int n = 0;
  std::vector<std::vector<Literal>> clauses;

  [[nodiscard]] int m() const { return static_cast<int>(clauses.size()); }

  friend bool operator==(const CnfFormula&, const CnfFormula&) = default;
};

inline void validate_formula(const CnfFormula& f) {
  if (f.n < 1) throw Error("formula needs at least one variable");
  if (f.clauses.empty()) throw Error("formula needs at least one clause");
  for (std::size_t j = 0; j < f.clauses.size(); ++j) {
    if (f.clauses[j].size() != 3)
      throw Error("clause " + std::to_string(j + 1) + " has " +
                  std::to_string(f.clauses[j].size()) + " literals, expected 3");
    for (const auto& lit : f.clauses[j])
      if (lit.var < 1 || lit.var > f.n)
        throw Error("clause " + std::to_string(j + 1) + " uses variable " +
                    std::to_string(lit.var) + " outside [1, " + std::to_string(f.n) + "]");
  }
}

/// assignment[i-1] is the value of x_i.
inline bool satisfies(const CnfFormula& f, const std::vector<bool>& assignment) {
  for (const auto& clause : f.clauses) {
    bool sat = false;
    for (const auto& lit : clause) sat |= assignment.at(lit.var - 1) == lit.positive;
    if (!sat) return false;
  }
  return true;
}

/// First satisfying assignment in binary counting order (x_1 least
/// significant, false before true), by exhaustive enumeration.
inline std::optional<std::vector<bool>> find_satisfying_assignment(const CnfFormula& f) {
  if (f.n > 24) throw Error("exhaustive enumeration refuses more than 24 variables");
  std::vector<bool> a(static_cast<std::size_t>(f.n));
  for (unsigned long long mask = 0; mask < (1ULL << f.n); ++mask) {
    for (int i = 0; i < f.n; ++i) a[i] = (mask >> i) & 1ULL;
    if (satisfies(f, a)) return a;
  }
  return std::nullopt;
}

/// Index maps for the reduction graph. Vectors are 1-based (slot 0 unused)
/// so indices read like the construction's subscripts.
struct HardnessLayout {
  int n = 0, m = 0, gadgets = 0, rows = 0, ell = 0;
  // u[j][p][q], j in [gadgets], p in [rows], q in [3].
  std::vector<std::vector<std::vector<VertexId>>> u;
  // Blocking paths at u^j_{p,1}, p in [rows-1]; position 1 touches u.
  std::vector<std::vector<std::vector<VertexId>>> su, tu;
  std::vector<VertexId> v;                       // v[1..gadgets+2]
  std::vector<std::vector<VertexId>> sv, tv;     // at v_i, i in [gadgets+1]
  std::vector<std::vector<VertexId>> p_yes, p_no, q_yes, q_no;  // [i][pos]
  std::vector<AgentId> nu, mu, lambda, tau, kappa;
  AgentId intro = kNoAgent;
  std::vector<std::vector<AgentId>> b_top;   // [j][i], i in [3j]
  std::vector<std::vector<AgentId>> b_row;   // [j][p], p in [4n]
  std::vector<std::vector<AgentId>> b_path;  // [i][q], q in [10n+3m]
  std::vector<std::vector<int>> clause_index;   // I_j, ascending
  std::vector<std::vector<VertexId>> clause_vertices;  // V_j, same order
};

struct HardnessInstance {
  Instance instance;
  Schedule schedule;
  HardnessLayout layout;
  DelayEvent malfunction;  // turn 1, agent a
};

inline int hardness_makespan(int n, int m) { return 14 * n + 3 * m + 5; }

inline std::size_t hardness_agent_count(int n, int m) {
  const long g = 2L * n + m;
  return static_cast<std::size_t>(4L * n + m + 1 + 3 * g * (g + 1) / 2 + 4L * n * g +
                                  (10L * n + 3 * m) * g);
}

inline HardnessInstance build_hardness_instance(const CnfFormula& f) {
  validate_formula(f);
  HardnessInstance out;
  HardnessLayout& L = out.layout;
  const int n = f.n, m = f.m();
  L.n = n;
  L.m = m;
  L.gadgets = 2 * n + m;
  L.rows = 4 * n + 2;
  L.ell = hardness_makespan(n, m);
  const int G = L.gadgets, N = L.rows, ell = L.ell;
  Graph& g = out.instance.graph;
  auto num = [](int x) { return std::to_string(x); };
  auto make_path = [&](const std::string& prefix, int count) {
    std::vector<VertexId> path(1, kNoVertex);
    for (int pos = 1; pos <= count; ++pos) {
      path.push_back(g.add_vertex(prefix + "_" + num(pos)));
      if (pos > 1) g.add_edge(path[pos - 1], path[pos]);
    }
    return path;
  };

  // Gadgets H^1 .. H^G.
  L.u.assign(G + 1, std::vector<std::vector<VertexId>>(N + 1, std::vector<VertexId>(4, kNoVertex)));
  L.su.assign(G + 1, std::vector<std::vector<VertexId>>(N));
  L.tu.assign(G + 1, std::vector<std::vector<VertexId>>(N));
  for (int j = 1; j <= G; ++j) {
    auto& u = L.u[j];
    for (int p = 1; p <= N; ++p)
      for (int q = 1; q <= 3; ++q) u[p][q] = g.add_vertex("u" + num(j) + "_" + num(p) + "_" + num(q));
    for (int p = 1; p <= N; ++p) {
      g.add_edge(u[p][1], u[p][2]);
      g.add_edge(u[p][2], u[p][3]);
    }
    for (int p = 1; p <= N - 1; ++p) {
      g.add_edge(u[p][1], u[p + 1][1]);
      g.add_edge(u[p][3], u[p + 1][3]);
    }
    for (int q = 1; q <= 2 * n; ++q) {
      g.add_edge(u[2 * q - 1][1], u[2 * q][3]);
      g.add_edge(u[2 * q][3], u[2 * q + 1][1]);
      g.add_edge(u[2 * q - 1][1], u[2 * q][2]);
      g.add_edge(u[2 * q][2], u[2 * q + 1][1]);
    }
    for (int p = 1; p <= N - 1; ++p) {
      L.su[j][p] = make_path("Su" + num(j) + "_" + num(p), ell + 1);
      L.tu[j][p] = make_path("Tu" + num(j) + "_" + num(p), ell + 1);
      g.add_edge(L.su[j][p][1], u[p][1]);
      g.add_edge(L.tu[j][p][1], u[p][1]);
    }
  }
  for (int j = 1; j <= G - 1; ++j)
    for (int p = 1; p <= N - 1; ++p) g.add_edge(L.u[j][p][3], L.u[j + 1][p][1]);

  // Path P with its blocking paths.
  L.v = make_path("v", G + 2);
  L.sv.assign(G + 2, {});
  L.tv.assign(G + 2, {});
  for (int i = 1; i <= G; ++i) g.add_edge(L.v[i + 1], L.u[i][1][1]);
  for (int i = 1; i <= G + 1; ++i) {
    L.sv[i] = make_path("Sv" + num(i), ell + 2);
    L.tv[i] = make_path("Tv" + num(i), ell + 2);
    g.add_edge(L.sv[i][1], L.v[i]);
    g.add_edge(L.tv[i][1], L.v[i]);
  }

  // Variable paths.
  L.p_yes.assign(n + 1, {});
  L.p_no.assign(n + 1, {});
  L.q_yes.assign(n + 1, {});
  L.q_no.assign(n + 1, {});
  for (int i = 1; i <= n; ++i) {
    L.p_yes[i] = make_path("Pyes" + num(i), 4 * n + 3);
    L.p_no[i] = make_path("Pno" + num(i), 4 * n + 3);
    L.q_yes[i] = make_path("Qyes" + num(i), 4 * n + 2);
    L.q_no[i] = make_path("Qno" + num(i), 4 * n + 2);
    g.add_edge(L.p_yes[i][4 * n + 3], L.u[1][4 * i - 2][1]);
    g.add_edge(L.p_no[i][4 * n + 3], L.u[1][4 * i][1]);
    g.add_edge(L.q_yes[i][1], L.u[G][4 * i - 2][3]);
    g.add_edge(L.q_no[i][1], L.u[G][4 * i][3]);
  }

  // Clause index sets.
  L.clause_index.assign(m + 1, {});
  L.clause_vertices.assign(m + 1, {});
  for (int j = 1; j <= m; ++j) {
    std::set<int> idx;
    for (const auto& lit : f.clauses[j - 1]) idx.insert(lit.positive ? 4 * lit.var - 1 : 4 * lit.var + 1);
    L.clause_index[j].assign(idx.begin(), idx.end());
    for (int l : L.clause_index[j]) L.clause_vertices[j].push_back(L.u[n + j][l - 1][3]);
  }

  // Agents and schedule rows.
  auto& agents = out.instance.agents;
  std::vector<std::vector<VertexId>> rows;
  auto add_agent = [&](const std::string& label, std::vector<VertexId> route) {
    // Pad to length ell by waiting on the target.
    if (static_cast<int>(route.size()) > ell + 1)
      throw std::logic_error("route for " + label + " exceeds the makespan");
    while (static_cast<int>(route.size()) < ell + 1) route.push_back(route.back());
    const auto id = static_cast<AgentId>(agents.size());
    agents.push_back({id, route.front(), route.back(), label});
    rows.push_back(std::move(route));
    return id;
  };

  L.nu.assign(n + 1, kNoAgent);
  L.mu.assign(n + 1, kNoAgent);
  for (int i = 1; i <= n; ++i) {
    for (int side = 0; side < 2; ++side) {
      const auto& P = side == 0 ? L.p_yes[i] : L.p_no[i];
      const auto& Q = side == 0 ? L.q_yes[i] : L.q_no[i];
      const int row = side == 0 ? 4 * i - 2 : 4 * i;
      std::vector<VertexId> route(P.begin() + 1, P.end());
      for (int j = 1; j <= G; ++j)
        for (int q = 1; q <= 3; ++q) route.push_back(L.u[j][row][q]);
      route.insert(route.end(), Q.begin() + 1, Q.end());
      (side == 0 ? L.nu : L.mu)[i] = add_agent((side == 0 ? "nu" : "mu") + num(i), route);
    }
  }
  // Red agents: s_0 on P, s_1 the next vertex of P, then gadget `j` rows
  // with detours to column `detour` at the turns in `special`.
  auto red_route = [&](int start, int j, const std::vector<int>& special, int detour) {
    std::vector<VertexId> route = {L.v[start], L.v[start + 1]};
    for (int l = 2; l <= 4 * n + 3; ++l) {
      const bool off = std::find(special.begin(), special.end(), l) != special.end();
      route.push_back(L.u[j][l - 1][off ? detour : 1]);
    }
    return route;
  };
  L.lambda.assign(n + 1, kNoAgent);
  L.tau.assign(n + 1, kNoAgent);
  L.kappa.assign(m + 1, kNoAgent);
  for (int i = 1; i <= n; ++i)
    L.lambda[i] = add_agent("lambda" + num(i), red_route(i, i, {4 * i - 1, 4 * i + 1}, 3));
  for (int j = 1; j <= m; ++j)
    L.kappa[j] = add_agent("kappa" + num(j), red_route(n + j, n + j, L.clause_index[j], 3));
  for (int i = 1; i <= n; ++i)
    L.tau[i] = add_agent("tau" + num(i), red_route(n + m + i, n + m + i, {4 * i - 1, 4 * i + 1}, 2));
  L.intro = add_agent("a", {L.v[G + 1], L.v[G + 2]});

  // Blocking agents walk S (from position `from` down to 1), the hub, then
  // T (from 1 up to position `to`).
  auto blocking_route = [](const std::vector<VertexId>& S, int from, VertexId hub,
                           const std::vector<VertexId>& T, int to) {
    std::vector<VertexId> route;
    for (int pos = from; pos >= 1; --pos) route.push_back(S[pos]);
    route.push_back(hub);
    for (int pos = 1; pos <= to; ++pos) route.push_back(T[pos]);
    return route;
  };
  L.b_top.assign(G + 1, {});
  L.b_row.assign(G + 1, {});
  L.b_path.assign(G + 1, {});
  for (int j = 1; j <= G; ++j) {
    const int top = 4 * n + 1;
    L.b_top[j].assign(3 * j + 1, kNoAgent);
    for (int i = 1; i <= 3 * j; ++i)
      L.b_top[j][i] = add_agent("bt" + num(j) + "_" + num(i),
                                blocking_route(L.su[j][top], 4 * n + 2 + i, L.u[j][top][1],
                                               L.tu[j][top], 10 * n + 3 * m + 3 - i));
    L.b_row[j].assign(4 * n + 1, kNoAgent);
    for (int p = 1; p <= 4 * n; ++p)
      L.b_row[j][p] = add_agent("br" + num(j) + "_" + num(p),
                                blocking_route(L.su[j][p], 4 * n + 2 + 3 * j, L.u[j][p][1],
                                               L.tu[j][p], 10 * n + 3 * m + 3 - 3 * j));
  }
  for (int i = 1; i <= G; ++i) {
    L.b_path[i].assign(10 * n + 3 * m + 1, kNoAgent);
    for (int q = 1; q <= 10 * n + 3 * m; ++q)
      L.b_path[i][q] = add_agent("bp" + num(i) + "_" + num(q),
                                 blocking_route(L.sv[i + 1], q + 2, L.v[i + 1], L.tv[i + 1],
                                                14 * n + 3 * m + 3 - q));
  }

  out.instance.makespan = ell;
  out.schedule = Schedule(std::move(rows));
  out.malfunction = DelayEvent{1, {L.intro}, true};
  return out;
}

/// Delay-1 operations that, applied after the turn-1 malfunction of a,
/// restore makespan ell when `assignment` satisfies the formula. With an
/// unsatisfied clause the clause agent waits at its first literal vertex.
inline std::vector<DelayEvent> repair_from_assignment(const HardnessLayout& L,
                                                      const CnfFormula& f,
                                                      const std::vector<bool>& assignment) {
  if (static_cast<int>(assignment.size()) != L.n)
    throw Error("assignment covers " + std::to_string(assignment.size()) + " variables, formula has " +
                std::to_string(L.n));
  const int n = L.n;
  std::map<int, std::vector<AgentId>> by_turn;
  // Turn 1: every red agent (blocked behind a) and the variable agent of
  // the chosen truth value.
  for (int i = 1; i <= n; ++i) {
    by_turn[1].push_back(L.lambda[i]);
    by_turn[1].push_back(L.tau[i]);
    by_turn[1].push_back(assignment[i - 1] ? L.nu[i] : L.mu[i]);
  }
  for (int j = 1; j <= L.m; ++j) by_turn[1].push_back(L.kappa[j]);

  // A red agent reaches schedule index idx at turn idx+1 and stays there
  // through turn `until`.
  auto hold = [&](AgentId a, int idx, int until) {
    for (int t = idx + 2; t <= until; ++t) by_turn[t].push_back(a);
  };
  for (int i = 1; i <= n; ++i) {
    const bool x = assignment[i - 1];
    hold(L.lambda[i], x ? 4 * i - 1 : 4 * i + 1, 4 * n + 2 + 3 * i);
    hold(L.tau[i], x ? 4 * i : 4 * i - 2, 4 * n + 2 + 3 * (n + L.m + i) - 1);
  }
  for (int j = 1; j <= L.m; ++j) {
    const auto& clause = f.clauses.at(j - 1);
    int idx = L.clause_index[j].front();
    for (int l : L.clause_index[j]) {
      bool sat = false;
      for (const auto& lit : clause)
        if ((lit.positive ? 4 * lit.var - 1 : 4 * lit.var + 1) == l &&
            assignment[lit.var - 1] == lit.positive)
          sat = true;
      if (sat) {
        idx = l;
        break;
      }
    }
    hold(L.kappa[j], idx, 4 * n + 2 + 3 * (n + j));
  }

  std::vector<DelayEvent> out;
  for (auto& [t, agents] : by_turn) {
    std::sort(agents.begin(), agents.end());
    out.push_back({t, agents, false});
  }
  return out;
}

/// Malfunction of a at turn 1 followed by the repair events.
inline Schedule apply_repair(const HardnessInstance& h, const std::vector<DelayEvent>& repair) {
  Schedule s = apply_delay1(h.schedule, h.malfunction.agents, h.malfunction.turn);
  return apply_delay_sequence(s, repair);
}

/// Structural audit of a generated reduction. Planarity is not checked.
inline std::vector<Violation> check_hardness_structure(const HardnessLayout& L, const Instance& inst) {
  std::vector<Violation> out;
  const Graph& g = inst.graph;
  const int n = L.n, m = L.m, G = L.gadgets, N = L.rows, ell = L.ell;
  auto need_edge = [&](const char* family, VertexId a, VertexId b) {
    if (!g.has_edge(a, b))
      out.push_back({"missing-edge", std::string(family) + " edge " + g.label(a) + "-" + g.label(b),
                     {a, b}});
  };
  if (g.max_degree() > 10)
    out.push_back({"max-degree", "maximum degree " + std::to_string(g.max_degree()) + " exceeds 10",
                   {static_cast<int>(g.max_degree())}});
  for (int j = 1; j <= G; ++j) {
    const auto& u = L.u[j];
    for (int p = 1; p <= N; ++p) {
      need_edge("gadget-path", u[p][1], u[p][2]);
      need_edge("gadget-path", u[p][2], u[p][3]);
    }
    for (int p = 1; p <= N - 1; ++p) {
      need_edge("gadget-rail", u[p][1], u[p + 1][1]);
      need_edge("gadget-rail", u[p][3], u[p + 1][3]);
    }
    for (int q = 1; q <= 2 * n; ++q) {
      need_edge("gadget-cross", u[2 * q - 1][1], u[2 * q][3]);
      need_edge("gadget-cross", u[2 * q][3], u[2 * q + 1][1]);
      need_edge("gadget-cross", u[2 * q - 1][1], u[2 * q][2]);
      need_edge("gadget-cross", u[2 * q][2], u[2 * q + 1][1]);
    }
    if (j < G)
      for (int p = 1; p <= N - 1; ++p) need_edge("inter-gadget", u[p][3], L.u[j + 1][p][1]);
  }
  auto check_path = [&](const std::string& name, const std::vector<VertexId>& path, VertexId hub,
                        int edges) {
    const int count = static_cast<int>(path.size()) - 1;
    if (count != edges + 1) {
      out.push_back({"blocking-path-length",
                     name + " has " + std::to_string(count) + " vertices, expected " +
                         std::to_string(edges + 1),
                     {count}});
      return;
    }
    need_edge("blocking-attach", path[1], hub);
    for (int pos = 1; pos < count; ++pos) need_edge("blocking-path", path[pos], path[pos + 1]);
  };
  for (int j = 1; j <= G; ++j)
    for (int p = 1; p <= N - 1; ++p) {
      check_path("S^" + std::to_string(j) + "_" + std::to_string(p), L.su[j][p], L.u[j][p][1], ell);
      check_path("T^" + std::to_string(j) + "_" + std::to_string(p), L.tu[j][p], L.u[j][p][1], ell);
    }
  for (int i = 1; i <= G + 1; ++i) {
    check_path("S_" + std::to_string(i), L.sv[i], L.v[i], ell + 1);
    check_path("T_" + std::to_string(i), L.tv[i], L.v[i], ell + 1);
  }
  for (int i = 1; i <= G + 1; ++i) need_edge("spine", L.v[i], L.v[i + 1]);
  for (int i = 1; i <= G; ++i) need_edge("spine-attach", L.v[i + 1], L.u[i][1][1]);

  auto expect_agent = [&](AgentId a, VertexId s, VertexId t) {
    const auto& entry = inst.agents.at(a);
    if (entry.source != s || entry.target != t)
      out.push_back({"agent-endpoint", "agent " + entry.label + " has endpoints " + g.label(entry.source) +
                                           " -> " + g.label(entry.target) + ", expected " +
                                           g.label(s) + " -> " + g.label(t),
                     {a}});
  };
  auto expect_distance = [&](AgentId a) {
    const auto& entry = inst.agents.at(a);
    const int d = g.bfs_distances(entry.source)[entry.target];
    if (d != ell)
      out.push_back({"blocking-agent-distance",
                     "agent " + entry.label + " is at distance " + std::to_string(d) + ", expected " +
                         std::to_string(ell),
                     {a, d}});
  };
  for (int j = 1; j <= G; ++j) {
    const int top = 4 * n + 1;
    for (int i = 1; i <= 3 * j; ++i) {
      expect_agent(L.b_top[j][i], L.su[j][top][4 * n + 2 + i], L.tu[j][top][10 * n + 3 * m + 3 - i]);
      expect_distance(L.b_top[j][i]);
    }
    for (int p = 1; p <= 4 * n; ++p) {
      expect_agent(L.b_row[j][p], L.su[j][p][4 * n + 2 + 3 * j], L.tu[j][p][10 * n + 3 * m + 3 - 3 * j]);
      expect_distance(L.b_row[j][p]);
    }
  }
  for (int i = 1; i <= G; ++i)
    for (int q = 1; q <= 10 * n + 3 * m; ++q) {
      expect_agent(L.b_path[i][q], L.sv[i + 1][q + 2], L.tv[i + 1][14 * n + 3 * m + 3 - q]);
      expect_distance(L.b_path[i][q]);
    }
  for (int i = 1; i <= n; ++i) {
    expect_agent(L.nu[i], L.p_yes[i][1], L.q_yes[i].back());
    expect_agent(L.mu[i], L.p_no[i][1], L.q_no[i].back());
    expect_agent(L.lambda[i], L.v[i], L.u[i][N][1]);
    expect_agent(L.tau[i], L.v[n + m + i], L.u[n + m + i][N][1]);
  }
  for (int j = 1; j <= m; ++j) expect_agent(L.kappa[j], L.v[n + j], L.u[n + j][N][1]);
  expect_agent(L.intro, L.v[G + 1], L.v[G + 2]);
  if (inst.num_agents() != hardness_agent_count(n, m))
    out.push_back({"agent-count", std::to_string(inst.num_agents()) + " agents, expected " +
                                      std::to_string(hardness_agent_count(n, m)),
                   {static_cast<int>(inst.num_agents())}});
  return out;
}

}  // namespace mapfma
