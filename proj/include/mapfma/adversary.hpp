#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mapfma/model.hpp"

namespace mapfma {

/// One forced malfunction-1: `agent` must stay during `turn`.
struct MalfunctionEvent {
  int turn = 1;
  AgentId agent = kNoAgent;

  friend auto operator<=>(const MalfunctionEvent&, const MalfunctionEvent&) = default;
};

struct MalfunctionPlan {
  std::vector<MalfunctionEvent> events;

  [[nodiscard]] int k() const { return static_cast<int>(events.size()); }
  [[nodiscard]] bool empty() const { return events.empty(); }

  friend bool operator==(const MalfunctionPlan&, const MalfunctionPlan&) = default;
};

/// Validates a (turn, agent) list. Input must already be sorted by turn.
inline MalfunctionPlan scripted_plan(const Instance& inst, std::vector<MalfunctionEvent> events) {
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& ev = events[i];
    if (ev.turn < 1)
      throw Error("malfunction event " + std::to_string(i) + " has turn " + std::to_string(ev.turn));
    if (ev.agent < 0 || static_cast<std::size_t>(ev.agent) >= inst.num_agents())
      throw Error("malfunction event " + std::to_string(i) + " names unknown agent " +
                  std::to_string(ev.agent));
    if (i > 0 && ev.turn < events[i - 1].turn)
      throw Error("malfunction events out of order at position " + std::to_string(i));
  }
  return MalfunctionPlan{std::move(events)};
}

/// Deterministic generator shared by random plans, random tie-breaks and
/// instance generation. Draws use modulo reduction on the raw 64-bit output
/// so sequences do not depend on the standard library's distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform-ish integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : engine_() % n; }

  int in_range(int lo, int hi) { return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1))); }

 private:
  std::mt19937_64 engine_;
};

inline MalfunctionPlan random_plan(const Instance& inst, const Schedule& sched, int k,
                                   std::uint64_t seed) {
  if (k < 0) throw Error("k must be nonnegative");
  MalfunctionPlan plan;
  if (k == 0 || inst.num_agents() == 0 || sched.length() == 0) return plan;
  Rng rng(seed);
  for (int i = 0; i < k; ++i) {
    const int turn = rng.in_range(1, sched.length());
    const auto agent = static_cast<AgentId>(rng.below(inst.num_agents()));
    plan.events.push_back({turn, agent});
  }
  std::stable_sort(plan.events.begin(), plan.events.end());
  return plan;
}

struct TieBreakPolicy {
  enum class Kind { LowestId, HighestD, SeededRandom };
  Kind kind = Kind::LowestId;
  std::uint64_t seed = 0;

  friend bool operator==(const TieBreakPolicy&, const TieBreakPolicy&) = default;
};

inline std::string_view to_string(TieBreakPolicy::Kind k) {
  switch (k) {
    case TieBreakPolicy::Kind::LowestId: return "lowest-id";
    case TieBreakPolicy::Kind::HighestD: return "highest-d";
    case TieBreakPolicy::Kind::SeededRandom: return "seeded-random";
  }
  return "?";
}

inline TieBreakPolicy::Kind parse_policy_kind(std::string_view s) {
  if (s == "lowest-id") return TieBreakPolicy::Kind::LowestId;
  if (s == "highest-d") return TieBreakPolicy::Kind::HighestD;
  if (s == "seeded-random") return TieBreakPolicy::Kind::SeededRandom;
  throw Error("unknown tie-break policy '" + std::string(s) + "'");
}

/// Applies a policy to a nonempty candidate list (sorted by id). `delays`
/// is indexed by agent id.
inline AgentId tie_break(const TieBreakPolicy& policy, std::span<const AgentId> candidates,
                         std::span<const int> delays, Rng& rng) {
  if (candidates.empty()) throw Error("tie-break over an empty candidate set");
  switch (policy.kind) {
    case TieBreakPolicy::Kind::LowestId:
      return *std::min_element(candidates.begin(), candidates.end());
    case TieBreakPolicy::Kind::HighestD: {
      AgentId best = kNoAgent;
      for (AgentId a : candidates)
        if (best == kNoAgent || delays[a] > delays[best] || (delays[a] == delays[best] && a < best))
          best = a;
      return best;
    }
    case TieBreakPolicy::Kind::SeededRandom:
      return candidates[rng.below(candidates.size())];
  }
  return candidates.front();
}

/// A scripted no-communication priority: at `turn`, `winner` gets `vertex`.
struct PriorityChoice {
  int turn = 0;
  VertexId vertex = kNoVertex;
  AgentId winner = kNoAgent;

  friend auto operator<=>(const PriorityChoice&, const PriorityChoice&) = default;
};

}  // namespace mapfma
