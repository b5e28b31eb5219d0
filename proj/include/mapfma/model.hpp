#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mapfma/graph.hpp"

namespace mapfma {

struct AgentSpec {
  AgentId id = kNoAgent;
  VertexId source = kNoVertex;
  VertexId target = kNoVertex;
  std::string label;

  friend bool operator==(const AgentSpec&, const AgentSpec&) = default;
};

/// A MAPF input: graph, agents with sources and targets, target makespan.
struct Instance {
  Graph graph;
  std::vector<AgentSpec> agents;
  int makespan = 0;

  [[nodiscard]] std::size_t num_agents() const { return agents.size(); }

  [[nodiscard]] const std::string& agent_label(AgentId a) const {
    return agents.at(static_cast<std::size_t>(a)).label;
  }

  [[nodiscard]] std::optional<AgentId> find_agent(std::string_view label) const {
    for (const auto& entry : agents)
      if (entry.label == label) return entry.id;
    return std::nullopt;
  }

  [[nodiscard]] AgentId agent_by_label(std::string_view label) const {
    auto id = find_agent(label);
    if (!id) throw Error("unknown agent '" + std::string(label) + "'");
    return *id;
  }

  [[nodiscard]] VertexId vertex_by_label(std::string_view label) const {
    auto id = graph.find(label);
    if (!id) throw Error("unknown vertex '" + std::string(label) + "'");
    return *id;
  }

  friend bool operator==(const Instance&, const Instance&) = default;
};

/// Turn-indexed positions for every agent; row a holds s_0(a) .. s_mu(a).
class Schedule {
 public:
  Schedule() = default;

  explicit Schedule(std::vector<std::vector<VertexId>> rows) : rows_(std::move(rows)) {
    if (rows_.empty()) return;
    const std::size_t width = rows_.front().size();
    if (width == 0) throw Error("schedule rows must hold at least turn 0");
    for (std::size_t a = 0; a < rows_.size(); ++a) {
      if (rows_[a].size() != width)
        throw Error("schedule row for agent " + std::to_string(a) + " has " +
                    std::to_string(rows_[a].size()) + " positions, expected " +
                    std::to_string(width));
    }
  }

  /// mu: the index of the last turn.
  [[nodiscard]] int length() const {
    return rows_.empty() ? 0 : static_cast<int>(rows_.front().size()) - 1;
  }

  [[nodiscard]] std::size_t num_agents() const { return rows_.size(); }

  [[nodiscard]] VertexId at(AgentId a, int turn) const {
    return rows_.at(static_cast<std::size_t>(a)).at(static_cast<std::size_t>(turn));
  }

  [[nodiscard]] std::span<const VertexId> row(AgentId a) const {
    return rows_.at(static_cast<std::size_t>(a));
  }

  [[nodiscard]] const std::vector<std::vector<VertexId>>& rows() const { return rows_; }

  friend bool operator==(const Schedule&, const Schedule&) = default;

 private:
  std::vector<std::vector<VertexId>> rows_;
};

/// A delay-1 operation by the agent set `agents` in turn `turn`.
struct DelayEvent {
  int turn = 1;
  std::vector<AgentId> agents;
  bool forced = false;

  friend bool operator==(const DelayEvent&, const DelayEvent&) = default;
};

struct Violation {
  std::string rule;
  std::string detail;
  std::vector<int> ids;
};

inline std::vector<Violation> validate_instance(const Instance& inst) {
  std::vector<Violation> out;
  const auto& g = inst.graph;
  std::unordered_map<VertexId, AgentId> seen_source;
  std::unordered_map<VertexId, AgentId> seen_target;
  std::set<std::string> seen_labels;
  for (std::size_t i = 0; i < inst.agents.size(); ++i) {
    const auto& entry = inst.agents[i];
    if (entry.id != static_cast<AgentId>(i))
      out.push_back({"agent-ids-dense", "agent '" + entry.label + "' has id " +
                                            std::to_string(entry.id) + " at position " +
                                            std::to_string(i),
                     {entry.id}});
    if (!seen_labels.insert(entry.label).second)
      out.push_back({"duplicate-agent-id", "agent label '" + entry.label + "' repeats", {entry.id}});
    for (VertexId v : {entry.source, entry.target}) {
      if (!g.contains(v))
        out.push_back({"unknown-vertex",
                       "agent '" + entry.label + "' refers to vertex " + std::to_string(v),
                       {entry.id, v}});
    }
    if (g.contains(entry.source)) {
      auto [it, fresh] = seen_source.emplace(entry.source, entry.id);
      if (!fresh)
        out.push_back({"distinct-sources",
                       "agents " + std::to_string(it->second) + " and " +
                           std::to_string(entry.id) + " share source " + g.label(entry.source),
                       {it->second, entry.id}});
    }
    if (g.contains(entry.target)) {
      auto [it, fresh] = seen_target.emplace(entry.target, entry.id);
      if (!fresh)
        out.push_back({"distinct-targets",
                       "agents " + std::to_string(it->second) + " and " +
                           std::to_string(entry.id) + " share target " + g.label(entry.target),
                       {it->second, entry.id}});
    }
  }
  if (inst.makespan < 0)
    out.push_back({"makespan-nonnegative", "makespan is " + std::to_string(inst.makespan), {}});
  return out;
}

struct FeasibilityVerdict {
  bool feasible = true;
  std::string rule;  // empty when feasible
  int turn = -1;
  std::vector<AgentId> agents;
  std::vector<VertexId> vertices;

  explicit operator bool() const { return feasible; }
};

/// Checks turn-0 placement, per-turn injectivity, stay-or-neighbour moves,
/// the no-swap rule and final placement on targets. Reports the first
/// violation in turn order.
inline FeasibilityVerdict check_feasible(const Instance& inst, const Schedule& sched) {
  if (sched.num_agents() != inst.num_agents())
    throw Error("schedule covers " + std::to_string(sched.num_agents()) + " agents, instance has " +
                std::to_string(inst.num_agents()));
  const auto& g = inst.graph;
  const int mu = sched.length();
  const auto n = static_cast<AgentId>(inst.num_agents());
  auto fail = [](std::string rule, int turn, std::vector<AgentId> agents,
                 std::vector<VertexId> vertices) {
    return FeasibilityVerdict{false, std::move(rule), turn, std::move(agents),
                              std::move(vertices)};
  };

  for (AgentId a = 0; a < n; ++a) {
    if (sched.at(a, 0) != inst.agents[a].source)
      return fail("source-mismatch", 0, {a}, {sched.at(a, 0), inst.agents[a].source});
  }
  std::unordered_map<VertexId, AgentId> occupant;
  for (int t = 0; t <= mu; ++t) {
    occupant.clear();
    for (AgentId a = 0; a < n; ++a) {
      VertexId v = sched.at(a, t);
      if (!g.contains(v)) return fail("unknown-vertex", t, {a}, {v});
      auto [it, fresh] = occupant.emplace(v, a);
      if (!fresh) return fail("collision", t, {it->second, a}, {v});
    }
    if (t == 0) continue;
    for (AgentId a = 0; a < n; ++a) {
      VertexId from = sched.at(a, t - 1);
      VertexId to = sched.at(a, t);
      if (from != to && !g.has_edge(from, to)) return fail("non-adjacent-move", t, {a}, {from, to});
    }
    // A swap needs b at `to` before the turn and at `from` after it.
    std::unordered_map<VertexId, AgentId> before;
    for (AgentId a = 0; a < n; ++a) before.emplace(sched.at(a, t - 1), a);
    for (AgentId a = 0; a < n; ++a) {
      VertexId from = sched.at(a, t - 1);
      VertexId to = sched.at(a, t);
      if (from == to) continue;
      auto it = before.find(to);
      if (it == before.end()) continue;
      AgentId b = it->second;
      if (b > a && sched.at(b, t) == from) return fail("swap", t, {a, b}, {from, to});
    }
  }
  for (AgentId a = 0; a < n; ++a) {
    if (sched.at(a, mu) != inst.agents[a].target)
      return fail("target-mismatch", mu, {a}, {sched.at(a, mu), inst.agents[a].target});
  }
  return {};
}

namespace detail {

/// In-place delay-1 on raw rows (all of equal width mu+1) for the agents
/// flagged in `delayed`, then amortization. Returns the new mu.
inline int delay1_in_place(std::vector<std::vector<VertexId>>& rows,
                           std::span<const char> delayed, int turn) {
  const int mu = static_cast<int>(rows.front().size()) - 1;
  bool prune = true;
  for (std::size_t a = 0; a < rows.size(); ++a) {
    auto& row = rows[a];
    if (delayed[a]) {
      // s'_j = s_j for j < turn, s'_j = s_{j-1} for j >= turn.
      const VertexId held = row[turn - 1];
      row.insert(row.begin() + turn, held);
      if (row[mu] != row[mu + 1]) prune = false;
    } else {
      row.push_back(row.back());
    }
  }
  if (prune) {
    for (auto& row : rows) row.pop_back();
    return mu;
  }
  return mu + 1;
}

}  // namespace detail

/// Delay-1 by `agents` in `turn`, followed by amortization. The result may
/// be infeasible; callers re-check with check_feasible.
inline Schedule apply_delay1(const Schedule& sched, std::span<const AgentId> agents, int turn) {
  const int mu = sched.length();
  if (agents.empty()) throw Error("delay-1 needs a nonempty agent set");
  if (turn < 1 || turn > mu)
    throw Error("delay-1 turn " + std::to_string(turn) + " outside [1, " + std::to_string(mu) + "]");
  std::vector<char> delayed(sched.num_agents(), 0);
  for (AgentId a : agents) {
    if (a < 0 || static_cast<std::size_t>(a) >= sched.num_agents())
      throw Error("delay-1 names unknown agent " + std::to_string(a));
    delayed[a] = 1;
  }
  auto rows = sched.rows();
  detail::delay1_in_place(rows, delayed, turn);
  return Schedule(std::move(rows));
}

inline Schedule apply_delay_sequence(const Schedule& sched, std::span<const DelayEvent> events) {
  for (std::size_t i = 1; i < events.size(); ++i)
    if (events[i].turn < events[i - 1].turn)
      throw Error("delay events out of order at position " + std::to_string(i));
  Schedule out = sched;
  for (const auto& ev : events) out = apply_delay1(out, ev.agents, ev.turn);
  return out;
}

/// Largest source-to-target hop distance; a lower bound on any feasible makespan.
inline int distance_lower_bound(const Instance& inst) {
  int best = 0;
  for (const auto& entry : inst.agents) {
    int d = inst.graph.bfs_distances(entry.source).at(static_cast<std::size_t>(entry.target));
    if (d < 0) throw Error("target of agent '" + entry.label + "' is unreachable");
    best = std::max(best, d);
  }
  return best;
}

}  // namespace mapfma
