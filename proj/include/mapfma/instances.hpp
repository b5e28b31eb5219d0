#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mapfma/adversary.hpp"
#include "mapfma/joint_solver.hpp"
#include "mapfma/model.hpp"

namespace mapfma {

struct GeneratedInstance {
  Instance instance;
  Schedule schedule;
};

inline AgentSpec make_agent(AgentId id, VertexId s, VertexId t, std::string label) {
  return AgentSpec{id, s, t, std::move(label)};
}

/// Schedule rows from label sequences.
inline Schedule schedule_from_labels(const Graph& g,
                                     const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::vector<VertexId>> out;
  for (const auto& row : rows) {
    std::vector<VertexId> r;
    for (const auto& label : row) {
      auto v = g.find(label);
      if (!v) throw Error("unknown vertex '" + label + "'");
      r.push_back(*v);
    }
    out.push_back(std::move(r));
  }
  return Schedule(std::move(out));
}

/// Star with centre u2: the two agents must pass u2 in a fixed order.
inline GeneratedInstance gen_fig1() {
  Graph g;
  for (const char* l : {"u1", "u2", "u3", "u4"}) g.add_vertex(l);
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  g.add_edge(1, 3);
  Instance inst{g, {make_agent(0, 0, 1, "a1"), make_agent(1, 3, 2, "a2")}, 2};
  Schedule s = schedule_from_labels(g, {{"u1", "u1", "u2"}, {"u4", "u2", "u3"}});
  return {std::move(inst), std::move(s)};
}

/// Triangle v1 v2 v3 with three arms. Arm i hangs off v_i through its
/// critical vertex c_i, which lies on a ten-vertex auxiliary path
/// p_1 .. p_7, c_i, p_9, p_10 and ends a three-vertex branch q_1 q_2 q_3.
/// Colored agent a_i starts at q_1 of arm i and targets q_1 of the next arm
/// counter-clockwise (a1 -> arm 3, a2 -> arm 1, a3 -> arm 2). Two black
/// agents per arm start at p_2 (front) and p_1 (back) and end at p_10 and
/// p_9; they wait once, at turn 6, and cross c_i at turns 7 and 8.
inline GeneratedInstance gen_fig2() {
  Graph g;
  for (int i = 1; i <= 3; ++i) g.add_vertex("v" + std::to_string(i));
  auto p = [](int arm, int j) {
    return j == 8 ? "c" + std::to_string(arm)
                  : "p" + std::to_string(arm) + "_" + std::to_string(j);
  };
  auto q = [](int arm, int j) { return "q" + std::to_string(arm) + "_" + std::to_string(j); };
  for (int arm = 1; arm <= 3; ++arm) {
    for (int j = 1; j <= 10; ++j) g.add_vertex(p(arm, j));
    for (int j = 1; j <= 3; ++j) g.add_vertex(q(arm, j));
  }
  auto id = [&](const std::string& l) { return *g.find(l); };
  g.add_edge(id("v1"), id("v2"));
  g.add_edge(id("v2"), id("v3"));
  g.add_edge(id("v1"), id("v3"));
  for (int arm = 1; arm <= 3; ++arm) {
    for (int j = 1; j < 10; ++j) g.add_edge(id(p(arm, j)), id(p(arm, j + 1)));
    g.add_edge(id(q(arm, 1)), id(q(arm, 2)));
    g.add_edge(id(q(arm, 2)), id(q(arm, 3)));
    g.add_edge(id(q(arm, 3)), id(p(arm, 8)));
    g.add_edge(id(p(arm, 8)), id("v" + std::to_string(arm)));
  }

  auto next_arm = [](int arm) { return (arm + 1) % 3 + 1; };
  std::vector<std::vector<std::string>> rows;
  Instance inst;
  inst.makespan = 9;
  AgentId next_id = 0;
  for (int arm = 1; arm <= 3; ++arm) {
    const int dest = next_arm(arm);
    std::vector<std::string> r = {q(arm, 1), q(arm, 2), q(arm, 3), p(arm, 8),
                                  "v" + std::to_string(arm), "v" + std::to_string(dest),
                                  p(dest, 8), q(dest, 3), q(dest, 2), q(dest, 1)};
    inst.agents.push_back(make_agent(next_id++, id(q(arm, 1)), id(q(dest, 1)),
                                     "a" + std::to_string(arm)));
    rows.push_back(std::move(r));
  }
  for (int arm = 1; arm <= 3; ++arm) {
    // Front agent: p2 .. p7 during turns 1-5, waits, then c, p9, p10.
    std::vector<std::string> front = {p(arm, 2), p(arm, 3), p(arm, 4), p(arm, 5), p(arm, 6),
                                      p(arm, 7), p(arm, 7), p(arm, 8), p(arm, 9), p(arm, 10)};
    std::vector<std::string> back = {p(arm, 1), p(arm, 2), p(arm, 3), p(arm, 4), p(arm, 5),
                                     p(arm, 6), p(arm, 6), p(arm, 7), p(arm, 8), p(arm, 9)};
    const std::string tag = "b" + std::to_string(arm);
    inst.agents.push_back(make_agent(next_id++, id(p(arm, 2)), id(p(arm, 10)), tag + "1"));
    inst.agents.push_back(make_agent(next_id++, id(p(arm, 1)), id(p(arm, 9)), tag + "2"));
    rows.push_back(std::move(front));
    rows.push_back(std::move(back));
  }
  inst.graph = g;
  Schedule s = schedule_from_labels(g, rows);
  return {std::move(inst), std::move(s)};
}

/// 4-connected rows x cols grid; vertex r*cols+c is labelled "r<r>c<c>".
inline Graph grid_graph(int rows, int cols) {
  if (rows < 1 || cols < 1) throw Error("grid dimensions must be positive");
  Graph g;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) g.add_vertex("r" + std::to_string(r) + "c" + std::to_string(c));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const VertexId v = r * cols + c;
      if (c + 1 < cols) g.add_edge(v, v + 1);
      if (r + 1 < rows) g.add_edge(v, v + cols);
    }
  }
  return g;
}

/// Random grid instance with distinct sources and distinct targets whose
/// optimum is found within `horizon_cap`; its makespan is that optimum.
inline GeneratedInstance gen_grid(int rows, int cols, int num_agents, std::uint64_t seed,
                                  int horizon_cap = 12, int attempts = 64) {
  if (num_agents < 0) throw Error("agent count must be nonnegative");
  if (rows * cols < 2 * num_agents)
    throw Error("grid " + std::to_string(rows) + "x" + std::to_string(cols) + " too small for " +
                std::to_string(num_agents) + " agents");
  const Graph g = grid_graph(rows, cols);
  Rng rng(seed);
  const auto nv = static_cast<int>(g.num_vertices());
  for (int attempt = 0; attempt < attempts; ++attempt) {
    auto draw = [&] {
      // Partial Fisher-Yates over vertex ids.
      std::vector<VertexId> ids(static_cast<std::size_t>(nv));
      for (int i = 0; i < nv; ++i) ids[i] = i;
      for (int i = 0; i < num_agents; ++i) std::swap(ids[i], ids[i + static_cast<int>(rng.below(nv - i))]);
      ids.resize(static_cast<std::size_t>(num_agents));
      return ids;
    };
    const auto sources = draw();
    const auto targets = draw();
    Instance inst;
    inst.graph = g;
    for (int a = 0; a < num_agents; ++a)
      inst.agents.push_back(make_agent(a, sources[a], targets[a], "a" + std::to_string(a + 1)));
    auto sol = solve_optimal(inst, horizon_cap);
    if (!sol) continue;
    inst.makespan = sol->length();
    return {std::move(inst), std::move(*sol)};
  }
  throw Error("no solvable grid instance within " + std::to_string(attempts) + " attempts");
}

}  // namespace mapfma
