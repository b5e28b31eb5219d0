#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <queue>
#include <vector>

#include "mapfma/model.hpp"

namespace mapfma {

/// Default ceiling on |V|^|A|, the size of the joint configuration space.
inline constexpr std::uint64_t kDefaultJointStateLimit = 4'000'000;

/// Breadth-first search over joint configurations from a fixed set of
/// sources. Successors are generated agent-major, vertex-minor, so the
/// parent of every configuration (and hence every returned schedule) is
/// reproducible. Injectivity and swaps are pruned during generation.
class JointBfs {
 public:
  JointBfs(const Graph& graph, std::vector<VertexId> sources,
           std::uint64_t state_limit = kDefaultJointStateLimit)
      : graph_(graph), sources_(std::move(sources)) {
    const double bound =
        std::pow(static_cast<double>(graph.num_vertices()), static_cast<double>(sources_.size()));
    if (bound > static_cast<double>(state_limit))
      throw Error("joint search space |V|^|A| = " + std::to_string(bound) +
                  " exceeds the configured limit " + std::to_string(state_limit));
    num_states_ = static_cast<std::uint64_t>(bound + 0.5);
    parent_.assign(num_states_, kUnseen);
    depth_.assign(num_states_, -1);
    const auto root = encode(sources_);
    parent_[root] = kRoot;
    depth_[root] = 0;
    frontier_.push(root);
  }

  /// Expands the search until `goal` is discovered or every configuration
  /// within `max_depth` turns is known. Returns the goal depth, if reached.
  std::optional<int> search(std::span<const VertexId> goal, int max_depth) {
    const auto target = encode(goal);
    if (depth_[target] >= 0) return depth_[target];
    std::vector<VertexId> cur(sources_.size());
    std::vector<VertexId> next(sources_.size());
    while (!frontier_.empty()) {
      const auto code = frontier_.front();
      if (depth_[code] >= max_depth) return std::nullopt;
      frontier_.pop();
      decode(code, cur);
      const int d = depth_[code];
      bool found = false;
      expand(cur, next, 0, [&](const std::vector<VertexId>& succ) {
        const auto sc = encode(succ);
        if (depth_[sc] >= 0) return;
        depth_[sc] = d + 1;
        parent_[sc] = static_cast<std::int64_t>(code);
        frontier_.push(sc);
        if (sc == target) found = true;
      });
      if (found) return depth_[target];
    }
    return std::nullopt;
  }

  /// Expands the full reachable space up to `max_depth`.
  void explore(int max_depth) {
    std::vector<VertexId> cur(sources_.size());
    std::vector<VertexId> next(sources_.size());
    while (!frontier_.empty()) {
      const auto code = frontier_.front();
      if (depth_[code] >= max_depth) break;
      frontier_.pop();
      decode(code, cur);
      const int d = depth_[code];
      expand(cur, next, 0, [&](const std::vector<VertexId>& succ) {
        const auto sc = encode(succ);
        if (depth_[sc] >= 0) return;
        depth_[sc] = d + 1;
        parent_[sc] = static_cast<std::int64_t>(code);
        frontier_.push(sc);
      });
    }
  }

  [[nodiscard]] std::optional<int> depth_of(std::span<const VertexId> config) const {
    const int d = depth_[encode(config)];
    if (d < 0) return std::nullopt;
    return d;
  }

  /// The schedule reaching `goal`; the goal must already be discovered.
  [[nodiscard]] Schedule path_to(std::span<const VertexId> goal) const {
    auto code = encode(goal);
    if (depth_[code] < 0) throw Error("configuration has not been reached by the search");
    std::vector<std::vector<VertexId>> turns;
    std::vector<VertexId> cfg(sources_.size());
    while (true) {
      decode(code, cfg);
      turns.push_back(cfg);
      if (parent_[code] == kRoot) break;
      code = static_cast<std::uint64_t>(parent_[code]);
    }
    std::vector<std::vector<VertexId>> rows(sources_.size(),
                                            std::vector<VertexId>(turns.size()));
    for (std::size_t t = 0; t < turns.size(); ++t)
      for (std::size_t a = 0; a < sources_.size(); ++a)
        rows[a][t] = turns[turns.size() - 1 - t][a];
    return Schedule(std::move(rows));
  }

 private:
  static constexpr std::int64_t kUnseen = -2;
  static constexpr std::int64_t kRoot = -1;

  [[nodiscard]] std::uint64_t encode(std::span<const VertexId> cfg) const {
    if (cfg.size() != sources_.size()) throw Error("configuration size mismatch");
    std::uint64_t code = 0;
    const auto n = static_cast<std::uint64_t>(graph_.num_vertices());
    for (VertexId v : cfg) {
      if (!graph_.contains(v)) throw Error("configuration names unknown vertex");
      code = code * n + static_cast<std::uint64_t>(v);
    }
    return code;
  }

  void decode(std::uint64_t code, std::vector<VertexId>& cfg) const {
    const auto n = static_cast<std::uint64_t>(graph_.num_vertices());
    for (std::size_t i = cfg.size(); i-- > 0;) {
      cfg[i] = static_cast<VertexId>(code % n);
      code /= n;
    }
  }

  template <typename Visit>
  void expand(const std::vector<VertexId>& cur, std::vector<VertexId>& next, std::size_t agent,
              Visit&& visit) const {
    if (agent == cur.size()) {
      visit(next);
      return;
    }
    const VertexId here = cur[agent];
    auto try_vertex = [&](VertexId w) {
      for (std::size_t j = 0; j < agent; ++j) {
        if (next[j] == w) return;                              // collision
        if (w != here && cur[j] == w && next[j] == here) return;  // swap
      }
      next[agent] = w;
      expand(cur, next, agent + 1, visit);
    };
    // Options in vertex-id order with the stay merged in.
    bool stay_done = false;
    for (VertexId w : graph_.neighbors(here)) {
      if (!stay_done && here < w) {
        try_vertex(here);
        stay_done = true;
      }
      try_vertex(w);
    }
    if (!stay_done) try_vertex(here);
  }

  const Graph& graph_;
  std::vector<VertexId> sources_;
  std::uint64_t num_states_ = 0;
  std::vector<std::int64_t> parent_;
  std::vector<int> depth_;
  std::queue<std::uint64_t> frontier_;
};

inline std::vector<VertexId> sources_of(const Instance& inst) {
  std::vector<VertexId> out;
  for (const auto& entry : inst.agents) out.push_back(entry.source);
  return out;
}

inline std::vector<VertexId> targets_of(const Instance& inst) {
  std::vector<VertexId> out;
  for (const auto& entry : inst.agents) out.push_back(entry.target);
  return out;
}

/// Minimum-makespan feasible schedule, or nullopt when none exists within
/// `horizon_cap` turns. Throws when the joint space exceeds `state_limit`.
inline std::optional<Schedule> solve_optimal(const Instance& inst, int horizon_cap,
                                             std::uint64_t state_limit = kDefaultJointStateLimit) {
  if (auto problems = validate_instance(inst); !problems.empty())
    throw Error("invalid instance: " + problems.front().detail);
  JointBfs bfs(inst.graph, sources_of(inst), state_limit);
  const auto goal = targets_of(inst);
  if (!bfs.search(goal, horizon_cap)) return std::nullopt;
  return bfs.path_to(goal);
}

struct WitnessVerdict {
  enum class Kind { OptimalByWitness, Undetermined };
  Kind kind = Kind::Undetermined;
  int lower_bound = 0;
  FeasibilityVerdict feasibility;
};

/// Certifies optimality when a feasible schedule meets the distance bound.
/// Never claims non-optimality.
inline WitnessVerdict verify_optimal_witness(const Instance& inst, const Schedule& sched) {
  WitnessVerdict out;
  out.lower_bound = distance_lower_bound(inst);
  out.feasibility = check_feasible(inst, sched);
  if (out.feasibility.feasible && sched.length() == out.lower_bound)
    out.kind = WitnessVerdict::Kind::OptimalByWitness;
  return out;
}

}  // namespace mapfma
