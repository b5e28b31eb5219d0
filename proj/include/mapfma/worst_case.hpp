#pragma once

#include <climits>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "mapfma/engine.hpp"

namespace mapfma {

struct WorstCaseLimits {
  std::size_t max_agents = 6;
  int max_k = 3;
  int max_length = 16;
  std::size_t node_limit = 2'000'000;
};

struct WorstCaseResult {
  bool deadlock = false;  // deadlock or budget exhaustion is reachable
  int makespan = 0;       // worst finite makespan when !deadlock
  MalfunctionPlan plan;
  std::vector<PriorityChoice> priorities;
  RunResult replay;  // the witness replayed through run()
  std::size_t nodes = 0;
};

namespace detail {

struct VecHash {
  std::size_t operator()(const std::vector<int>& v) const noexcept {
    std::uint64_t h = 1469598103934665603ULL;
    for (int x : v) {
      h ^= static_cast<std::uint32_t>(x);
      h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

class WorstCaseSearch {
 public:
  static constexpr int kInf = INT_MAX;

  WorstCaseSearch(Protocol protocol, int budget, std::size_t node_limit)
      : protocol_(protocol), budget_(budget), node_limit_(node_limit) {}

  int value(const Simulator& sim, int k_left, int streak) {
    if (sim.completed()) return sim.length();
    if (sim.turn() > budget_) return kInf;
    if (streak >= static_cast<int>(sim.num_agents()) + 1 && !sim.all_on_target()) return kInf;

    std::vector<int> key = key_of(sim, k_left, streak);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second.value;
    if (++nodes_ > node_limit_)
      throw Error("worst-case search exceeded its node limit of " + std::to_string(node_limit_));

    Entry best{-1, {}, {}};
    const auto n = sim.num_agents();
    std::vector<AgentId> subset;
    auto try_subset = [&](const std::vector<AgentId>& chosen) {
      std::vector<char> forced(n, 0);
      for (AgentId a : chosen) forced[a] = 1;
      std::vector<std::pair<VertexId, std::vector<AgentId>>> groups;
      if (protocol_ == Protocol::NoComm) groups = sim.contests(forced);
      std::vector<std::size_t> pick(groups.size(), 0);
      while (true) {
        std::vector<PriorityChoice> choices;
        for (std::size_t g = 0; g < groups.size(); ++g)
          choices.push_back({sim.turn(), groups[g].first, groups[g].second[pick[g]]});
        Simulator child = sim;
        Chooser chooser;
        if (!choices.empty()) {
          chooser = [&choices](int, VertexId v, std::span<const AgentId>) -> AgentId {
            for (const auto& c : choices)
              if (c.vertex == v) return c.winner;
            return kNoAgent;
          };
        }
        const bool advanced = child.step(forced, chooser, nullptr);
        int next_streak = streak;
        if (advanced) {
          next_streak = 0;
        } else if (chosen.empty()) {
          ++next_streak;
        }
        const int v = value(child, k_left - static_cast<int>(chosen.size()), next_streak);
        if (v > best.value) best = {v, chosen, choices};
        if (best.value == kInf) return;
        std::size_t g = 0;
        while (g < groups.size() && ++pick[g] == groups[g].second.size()) pick[g++] = 0;
        if (g == groups.size()) return;
      }
    };
    // Subsets in order of size, then lexicographically.
    for (int size = 0; size <= std::min<int>(k_left, static_cast<int>(n)); ++size) {
      enumerate(static_cast<int>(n), size, 0, subset, try_subset);
      if (best.value == kInf) break;
    }
    memo_.emplace(std::move(key), best);
    return best.value;
  }

  /// Follows the recorded argmax choices from `sim` to a leaf.
  void witness(Simulator sim, int k_left, int streak, MalfunctionPlan& plan,
               std::vector<PriorityChoice>& priorities) const {
    while (!sim.completed() && sim.turn() <= budget_ &&
           !(streak >= static_cast<int>(sim.num_agents()) + 1 && !sim.all_on_target())) {
      auto it = memo_.find(key_of(sim, k_left, streak));
      if (it == memo_.end()) break;
      const Entry& e = it->second;
      std::vector<char> forced(sim.num_agents(), 0);
      for (AgentId a : e.forced) {
        forced[a] = 1;
        plan.events.push_back({sim.turn(), a});
      }
      priorities.insert(priorities.end(), e.choices.begin(), e.choices.end());
      const auto choices = e.choices;
      Chooser chooser = [choices](int, VertexId v, std::span<const AgentId>) -> AgentId {
        for (const auto& c : choices)
          if (c.vertex == v) return c.winner;
        return kNoAgent;
      };
      const bool advanced = sim.step(forced, chooser, nullptr);
      if (advanced) {
        streak = 0;
      } else if (e.forced.empty()) {
        ++streak;
      }
      k_left -= static_cast<int>(e.forced.size());
    }
  }

  [[nodiscard]] std::size_t nodes() const { return nodes_; }

 private:
  struct Entry {
    int value;
    std::vector<AgentId> forced;
    std::vector<PriorityChoice> choices;
  };

  [[nodiscard]] std::vector<int> key_of(const Simulator& sim, int k_left, int streak) const {
    std::vector<int> key = {sim.turn(), k_left, streak};
    sim.append_key(key);
    return key;
  }

  template <typename F>
  static void enumerate(int n, int size, int from, std::vector<AgentId>& cur, F& f) {
    if (static_cast<int>(cur.size()) == size) {
      f(cur);
      return;
    }
    for (int a = from; a < n; ++a) {
      cur.push_back(a);
      enumerate(n, size, a + 1, cur, f);
      cur.pop_back();
    }
  }

  Protocol protocol_;
  int budget_;
  std::size_t node_limit_;
  std::size_t nodes_ = 0;
  std::unordered_map<std::vector<int>, Entry, VecHash> memo_;
};

}  // namespace detail

/// Exhaustive adaptive adversary: at every turn it may force any set of
/// agents (within the remaining k) and, under no communication, pick every
/// contention winner. Deadlock and budget exhaustion rank above any finite
/// makespan. The witness is replayed through run() before returning.
inline WorstCaseResult worst_case_search(const Instance& inst, const Schedule& sched,
                                         Protocol protocol, int k, std::optional<int> budget = {},
                                         TieBreakPolicy policy = {}, WorstCaseLimits limits = {}) {
  if (k < 0) throw Error("k must be nonnegative");
  if (inst.num_agents() > limits.max_agents)
    throw Error("worst-case search refuses " + std::to_string(inst.num_agents()) +
                " agents (cap " + std::to_string(limits.max_agents) + ")");
  if (k > limits.max_k)
    throw Error("worst-case search refuses k = " + std::to_string(k) + " (cap " +
                std::to_string(limits.max_k) + ")");
  if (sched.length() > limits.max_length)
    throw Error("worst-case search refuses schedule length " + std::to_string(sched.length()) +
                " (cap " + std::to_string(limits.max_length) + ")");
  if (policy.kind == TieBreakPolicy::Kind::SeededRandom)
    throw Error("worst-case search needs a deterministic tie-break policy");
  if (auto v = check_feasible(inst, sched); !v)
    throw Error("input schedule is infeasible: " + v.rule + " at turn " + std::to_string(v.turn));

  MalfunctionPlan dummy;
  dummy.events.resize(static_cast<std::size_t>(k));
  const int b = budget.value_or(default_budget(inst, sched, dummy));
  detail::WorstCaseSearch search(protocol, b, limits.node_limit);
  Simulator root(inst, sched, protocol, policy);
  const int value = search.value(root, k, 0);

  WorstCaseResult out;
  out.nodes = search.nodes();
  out.deadlock = value == detail::WorstCaseSearch::kInf;
  out.makespan = out.deadlock ? -1 : value;
  search.witness(root, k, 0, out.plan, out.priorities);
  RunOptions opt;
  opt.priorities = out.priorities;
  opt.budget = b;
  out.replay = run(inst, sched, out.plan, protocol, policy, opt);
  const bool replay_inf = out.replay.outcome != Outcome::Completed;
  if (replay_inf != out.deadlock || (!out.deadlock && out.replay.makespan != value))
    throw std::logic_error("worst-case witness does not reproduce the searched outcome");
  return out;
}

}  // namespace mapfma
