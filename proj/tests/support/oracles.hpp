#pragma once
// Reference implementations written directly from the definitions, kept
// deliberately naive and independent of the library's code paths.

#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "mapfma/model.hpp"

namespace oracle {

using mapfma::AgentId;
using mapfma::VertexId;
using Rows = std::vector<std::vector<VertexId>>;

/// Delay-1 by `who` at turn i: positional formula, then amortization.
inline Rows delay1(const Rows& s, const std::set<AgentId>& who, int i) {
  const int mu = static_cast<int>(s.at(0).size()) - 1;
  Rows out(s.size());
  // s'_j(a) = s_j(a) for j < i, s_{j-1}(a) for i <= j <= mu+1, for a in who.
  for (std::size_t a = 0; a < s.size(); ++a) {
    for (int j = 0; j <= mu + 1; ++j) {
      int src;
      if (who.count(static_cast<AgentId>(a)))
        src = j < i ? j : j - 1;
      else
        src = std::min(j, mu);
      out[a].push_back(s[a][src]);
    }
  }
  bool stationary_tail = true;
  for (AgentId a : who)
    if (out[a][mu] != out[a][mu + 1]) stationary_tail = false;
  if (stationary_tail)
    for (auto& row : out) row.pop_back();
  return out;
}

/// Naive feasibility predicate for a row-major schedule.
inline bool feasible(const mapfma::Instance& inst, const Rows& s) {
  const std::size_t n = inst.agents.size();
  if (s.size() != n) return false;
  const std::size_t width = n ? s[0].size() : 1;
  for (const auto& r : s)
    if (r.size() != width || width == 0) return false;
  for (std::size_t a = 0; a < n; ++a)
    if (s[a].front() != inst.agents[a].source || s[a].back() != inst.agents[a].target) return false;
  for (std::size_t t = 0; t < width; ++t)
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b) {
        if (s[a][t] == s[b][t]) return false;
        if (t > 0 && s[a][t] == s[b][t - 1] && s[b][t] == s[a][t - 1]) return false;
      }
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t t = 1; t < width; ++t)
      if (s[a][t] != s[a][t - 1] && !inst.graph.has_edge(s[a][t], s[a][t - 1])) return false;
  return true;
}

/// Smallest L <= cap for which some feasible schedule exists, by layered
/// enumeration of every joint configuration reachable in exactly t turns.
/// Returns -1 when none exists within the cap.
inline int exhaustive_optimum(const mapfma::Instance& inst, int cap) {
  const std::size_t n = inst.agents.size();
  std::vector<VertexId> start, goal;
  for (const auto& a : inst.agents) {
    start.push_back(a.source);
    goal.push_back(a.target);
  }
  std::set<std::vector<VertexId>> layer = {start};
  for (int t = 0; t <= cap; ++t) {
    if (layer.count(goal)) return t;
    std::set<std::vector<VertexId>> next;
    for (const auto& cfg : layer) {
      // Cartesian product of stay-or-neighbour options.
      std::vector<std::vector<VertexId>> options(n);
      for (std::size_t a = 0; a < n; ++a) {
        options[a].push_back(cfg[a]);
        for (VertexId w = 0; w < static_cast<VertexId>(inst.graph.num_vertices()); ++w)
          if (inst.graph.has_edge(cfg[a], w)) options[a].push_back(w);
      }
      std::vector<std::size_t> idx(n, 0);
      while (true) {
        std::vector<VertexId> succ(n);
        for (std::size_t a = 0; a < n; ++a) succ[a] = options[a][idx[a]];
        bool ok = true;
        for (std::size_t a = 0; a < n && ok; ++a)
          for (std::size_t b = a + 1; b < n && ok; ++b)
            if (succ[a] == succ[b] || (succ[a] == cfg[b] && succ[b] == cfg[a])) ok = false;
        if (ok) next.insert(succ);
        std::size_t k = 0;
        while (k < n && ++idx[k] == options[k].size()) idx[k++] = 0;
        if (k == n) break;
      }
      if (n == 0) break;
    }
    layer = std::move(next);
  }
  return -1;
}

/// Per-vertex occupation-spell counts after each turn of an executed
/// schedule: entry t holds the counts after turn t.
inline std::vector<std::vector<int>> spell_counts(std::size_t num_vertices, const Rows& s) {
  std::vector<std::vector<int>> out;
  if (s.empty()) return out;
  const std::size_t width = s[0].size();
  for (std::size_t t = 0; t < width; ++t) {
    std::vector<int> c(num_vertices, 0);
    for (const auto& row : s) {
      for (std::size_t j = 0; j <= t; ++j)
        if (j == 0 || row[j] != row[j - 1]) ++c[row[j]];
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace oracle
