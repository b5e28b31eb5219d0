#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mapfma/adversary.hpp"
#include "mapfma/model.hpp"

namespace mapfma {

enum class Protocol { NoComm, Cbm, Ucbm, Ccbm };

inline std::string_view to_string(Protocol p) {
  switch (p) {
    case Protocol::NoComm: return "nocomm";
    case Protocol::Cbm: return "cbm";
    case Protocol::Ucbm: return "ucbm";
    case Protocol::Ccbm: return "ccbm";
  }
  return "?";
}

inline Protocol parse_protocol(std::string_view s) {
  if (s == "nocomm") return Protocol::NoComm;
  if (s == "cbm") return Protocol::Cbm;
  if (s == "ucbm") return Protocol::Ucbm;
  if (s == "ccbm") return Protocol::Ccbm;
  throw Error("unknown protocol '" + std::string(s) + "'");
}

enum class Intent { Stay, Move, Malfunction };

enum class DelayReason { Malfunction, UnhealthyTarget, PriorityLoss, TieBreak, CounterWait, Blocked };

inline std::string_view to_string(DelayReason r) {
  switch (r) {
    case DelayReason::Malfunction: return "malfunction";
    case DelayReason::UnhealthyTarget: return "unhealthy-target";
    case DelayReason::PriorityLoss: return "priority-loss";
    case DelayReason::TieBreak: return "tie-break";
    case DelayReason::CounterWait: return "counter-wait";
    case DelayReason::Blocked: return "blocked";
  }
  return "?";
}

struct Decision {
  AgentId agent = kNoAgent;
  Intent intent = Intent::Stay;
  VertexId from = kNoVertex;
  VertexId to = kNoVertex;
};

struct Modification {
  AgentId agent = kNoAgent;
  DelayReason reason = DelayReason::Blocked;
  VertexId vertex = kNoVertex;   // the vertex it wanted, if any
  AgentId winner = kNoAgent;     // contention winner, if any
};

struct MoveAction {
  AgentId agent = kNoAgent;
  VertexId from = kNoVertex;
  VertexId to = kNoVertex;
};

struct TurnPhaseRecord {
  int turn = 0;
  std::vector<Decision> decisions;
  std::vector<Modification> modifications;
  std::vector<MoveAction> actions;
};

/// Contention winner selection: (turn, vertex, contenders sorted by id).
/// Returning kNoAgent defers to the tie-break policy.
using Chooser = std::function<AgentId(int, VertexId, std::span<const AgentId>)>;

/// Per-agent expected spell counts: entry i is the spell count of s_i(a)
/// at turn i when sigma is replayed without deviation.
inline std::vector<std::vector<int>> ccbm_expected_counts(const Instance& inst, const Schedule& sched) {
  const auto n = sched.num_agents();
  const int mu = sched.length();
  std::vector<int> count(inst.graph.num_vertices(), 0);
  std::vector<std::vector<int>> out(n, std::vector<int>(static_cast<std::size_t>(mu) + 1));
  for (std::size_t a = 0; a < n; ++a) {
    ++count[sched.at(static_cast<AgentId>(a), 0)];
  }
  for (std::size_t a = 0; a < n; ++a) out[a][0] = count[sched.at(static_cast<AgentId>(a), 0)];
  for (int t = 1; t <= mu; ++t) {
    for (std::size_t a = 0; a < n; ++a) {
      const auto id = static_cast<AgentId>(a);
      if (sched.at(id, t) != sched.at(id, t - 1)) ++count[sched.at(id, t)];
    }
    for (std::size_t a = 0; a < n; ++a) out[a][t] = count[sched.at(static_cast<AgentId>(a), t)];
  }
  return out;
}

/// Smaller accumulated delay wins; equal delays go to the policy.
inline AgentId ucbm_priority(AgentId a, int d_a, AgentId b, int d_b, const TieBreakPolicy& policy,
                             Rng& rng) {
  if (d_a != d_b) return d_a < d_b ? a : b;
  if (policy.kind == TieBreakPolicy::Kind::SeededRandom)
    return rng.below(2) == 0 ? std::min(a, b) : std::max(a, b);
  return std::min(a, b);
}

/// Turn-by-turn executor. Holds the live schedule, per-agent progress into
/// the original schedule, delay counts and per-vertex spell counters.
class Simulator {
 public:
  Simulator(const Instance& inst, const Schedule& sched, Protocol protocol, TieBreakPolicy policy)
      : inst_(&inst),
        protocol_(protocol),
        policy_(policy),
        rng_(policy.seed),
        orig_(sched.rows()),
        rows_(sched.rows()),
        mu0_(sched.length()) {
    const auto n = sched.num_agents();
    if (n != inst.num_agents()) throw Error("schedule and instance disagree on the agent count");
    pos_.resize(n);
    progress_.assign(n, 0);
    delays_.assign(n, 0);
    occ_.assign(inst.graph.num_vertices(), kNoAgent);
    counters_.assign(inst.graph.num_vertices(), 0);
    for (std::size_t a = 0; a < n; ++a) {
      pos_[a] = orig_[a][0];
      occ_[pos_[a]] = static_cast<AgentId>(a);
      ++counters_[pos_[a]];
    }
    if (protocol_ == Protocol::Ccbm) expected_ = ccbm_expected_counts(inst, sched);
    scratch_.resize(n);
  }

  /// Next turn to be played.
  [[nodiscard]] int turn() const { return turn_; }
  /// Current length L of the live schedule.
  [[nodiscard]] int length() const {
    return rows_.empty() ? 0 : static_cast<int>(rows_.front().size()) - 1;
  }
  [[nodiscard]] bool completed() const { return turn_ > length(); }
  [[nodiscard]] std::size_t num_agents() const { return pos_.size(); }
  [[nodiscard]] VertexId position(AgentId a) const { return pos_[a]; }
  [[nodiscard]] int progress(AgentId a) const { return progress_[a]; }
  [[nodiscard]] int delay_count(AgentId a) const { return delays_[a]; }
  [[nodiscard]] const std::vector<int>& delay_counts() const { return delays_; }
  [[nodiscard]] const std::vector<int>& counters() const { return counters_; }
  [[nodiscard]] Protocol protocol() const { return protocol_; }
  [[nodiscard]] const Instance& instance() const { return *inst_; }
  [[nodiscard]] const std::vector<std::vector<int>>& expected_counts() const { return expected_; }

  /// Vertex the live schedule asks `a` to occupy after the current turn.
  [[nodiscard]] VertexId intended(AgentId a) const { return rows_[a][turn_]; }

  [[nodiscard]] bool parked(AgentId a) const {
    return progress_[a] == mu0_ && pos_[a] == inst_->agents[a].target;
  }

  [[nodiscard]] bool all_on_target() const {
    for (std::size_t a = 0; a < pos_.size(); ++a)
      if (pos_[a] != inst_->agents[a].target) return false;
    return true;
  }

  /// The executed schedule so far: turns 0 .. turn()-1.
  [[nodiscard]] Schedule executed() const {
    auto rows = rows_;
    for (auto& r : rows) r.resize(static_cast<std::size_t>(turn_));
    return Schedule(std::move(rows));
  }

  [[nodiscard]] const std::vector<std::vector<VertexId>>& live_rows() const { return rows_; }

  /// Healthiness of `a`'s next vertex given this turn's forced agents.
  [[nodiscard]] bool cbm_is_healthy(AgentId a, std::span<const char> forced) const {
    const VertexId from = pos_[a];
    const VertexId v = intended(a);
    if (v == from) return true;
    for (std::size_t b = 0; b < pos_.size(); ++b) {
      if (static_cast<AgentId>(b) == a || forced[b]) continue;
      if (rows_[b][turn_] == v && pos_[b] != v) return false;  // competing entrant
    }
    const AgentId occ = occ_[v];
    if (occ == kNoAgent) return true;
    return !forced[occ] && rows_[occ][turn_] != v;
  }

  /// The counter half of the CCBM movement rule.
  [[nodiscard]] bool ccbm_counter_permits(AgentId a) const {
    const VertexId u = intended(a);
    const int c = expected_[a][progress_[a] + 1];
    return counters_[u] + 1 == c;
  }

  /// Vertices wanted by two or more unforced movers, with the contenders.
  /// Under CCBM only agents that pass the counter check contend.
  [[nodiscard]] std::vector<std::pair<VertexId, std::vector<AgentId>>> contests(
      std::span<const char> forced) const {
    std::vector<std::pair<VertexId, AgentId>> wants;
    for (std::size_t a = 0; a < pos_.size(); ++a) {
      const auto id = static_cast<AgentId>(a);
      if (forced[a] || intended(id) == pos_[a]) continue;
      if (protocol_ == Protocol::Ccbm && !ccbm_counter_permits(id)) continue;
      wants.emplace_back(intended(id), id);
    }
    std::sort(wants.begin(), wants.end());
    std::vector<std::pair<VertexId, std::vector<AgentId>>> out;
    for (std::size_t i = 0; i < wants.size();) {
      std::size_t j = i;
      while (j < wants.size() && wants[j].first == wants[i].first) ++j;
      if (j - i >= 2) {
        std::vector<AgentId> group;
        for (std::size_t x = i; x < j; ++x) group.push_back(wants[x].second);
        out.emplace_back(wants[i].first, std::move(group));
      }
      i = j;
    }
    return out;
  }

  /// Plays one turn. `forced[a]` marks a malfunction-1 of a this turn.
  /// `choose` settles no-communication contention (policy when empty).
  /// Returns true when some agent advanced its progress pointer.
  bool step(std::span<const char> forced, const Chooser& choose, TurnPhaseRecord* rec) {
    if (completed()) throw Error("step after completion");
    const int t = turn_;
    const auto n = pos_.size();
    auto& delayed = scratch_.delayed;
    auto& moving = scratch_.moving;
    delayed.assign(n, 0);
    moving.assign(n, 0);
    std::vector<Modification> mods;

    auto block = [&](AgentId a, DelayReason r, VertexId v, AgentId winner) {
      if (delayed[a]) return;
      delayed[a] = 1;
      moving[a] = 0;
      if (rec) mods.push_back({a, r, v, winner});
    };

    // Decision phase.
    if (rec) {
      rec->turn = t;
      for (std::size_t a = 0; a < n; ++a) {
        const auto id = static_cast<AgentId>(a);
        Intent in = forced[a] ? Intent::Malfunction
                              : (intended(id) == pos_[a] ? Intent::Stay : Intent::Move);
        rec->decisions.push_back({id, in, pos_[a], intended(id)});
      }
    }
    for (std::size_t a = 0; a < n; ++a) {
      const auto id = static_cast<AgentId>(a);
      if (forced[a]) {
        block(id, DelayReason::Malfunction, kNoVertex, kNoAgent);
        continue;
      }
      if (intended(id) != pos_[a]) moving[a] = 1;
    }

    // Modification phase.
    if (protocol_ == Protocol::Ccbm) {
      for (std::size_t a = 0; a < n; ++a) {
        if (!moving[a]) continue;
        const auto id = static_cast<AgentId>(a);
        const VertexId u = intended(id);
        const int c = expected_[a][progress_[a] + 1];
        if (counters_[u] + 1 > c)
          throw std::logic_error("counter integrity failure: agent " + std::to_string(a) +
                                 " expects spell " + std::to_string(c) + " of vertex " +
                                 std::to_string(u) + " which already has " +
                                 std::to_string(counters_[u]) + " at turn " + std::to_string(t));
        if (counters_[u] + 1 < c) block(id, DelayReason::CounterWait, u, kNoAgent);
      }
    }

    for (auto& [v, group] : contests_among(moving)) {
      resolve_contest(t, v, group, choose, block);
    }

    // Occupancy: keep the largest set of movers whose targets are empty or
    // vacated by another mover; swaps block both sides.
    const DelayReason occ_reason =
        protocol_ == Protocol::Cbm ? DelayReason::UnhealthyTarget : DelayReason::Blocked;
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t a = 0; a < n; ++a) {
        if (!moving[a]) continue;
        const auto id = static_cast<AgentId>(a);
        const VertexId v = intended(id);
        const AgentId b = occ_[v];
        if (b == kNoAgent) continue;
        if (!moving[b]) {
          block(id, occ_reason, v, b);
          changed = true;
        } else if (intended(b) == pos_[a]) {
          block(id, occ_reason, v, b);
          block(b, occ_reason, pos_[a], id);
          changed = true;
        }
      }
    }

    bool any_delay = false;
    for (std::size_t a = 0; a < n; ++a) any_delay |= delayed[a] != 0;
    if (any_delay) detail::delay1_in_place(rows_, delayed, t);

    // Action phase.
    bool advanced = false;
    for (std::size_t a = 0; a < n; ++a)
      if (rows_[a][t] != pos_[a]) occ_[pos_[a]] = kNoAgent;
    for (std::size_t a = 0; a < n; ++a) {
      const VertexId to = rows_[a][t];
      if (to != pos_[a]) {
        if (rec) rec->actions.push_back({static_cast<AgentId>(a), pos_[a], to});
        ++counters_[to];
        pos_[a] = to;
      }
      occ_[to] = static_cast<AgentId>(a);
      if (delayed[a]) {
        ++delays_[a];
      } else if (progress_[a] < mu0_) {
        ++progress_[a];
        advanced = true;
      }
      if (orig_[a][progress_[a]] != pos_[a])
        throw std::logic_error("progress pointer out of sync for agent " + std::to_string(a));
    }
    if (rec) rec->modifications = std::move(mods);
    ++turn_;
    return advanced;
  }

  /// Appends a canonical encoding of everything that determines future
  /// behaviour (apart from the adversary and the turn number).
  void append_key(std::vector<int>& out) const {
    out.push_back(length() - turn_);
    for (std::size_t a = 0; a < pos_.size(); ++a) {
      out.push_back(pos_[a]);
      out.push_back(progress_[a]);
    }
    const bool uses_d = policy_.kind == TieBreakPolicy::Kind::HighestD;
    switch (protocol_) {
      case Protocol::NoComm:
        if (uses_d) out.insert(out.end(), delays_.begin(), delays_.end());
        break;
      case Protocol::Cbm:
        for (int d : delays_) out.push_back(uses_d ? d : std::min(d, 1));
        break;
      case Protocol::Ucbm:
        out.insert(out.end(), delays_.begin(), delays_.end());
        break;
      case Protocol::Ccbm:
        if (uses_d) out.insert(out.end(), delays_.begin(), delays_.end());
        out.insert(out.end(), counters_.begin(), counters_.end());
        break;
    }
  }

 private:
  struct Scratch {
    std::vector<char> delayed;
    std::vector<char> moving;
    void resize(std::size_t n) {
      delayed.reserve(n);
      moving.reserve(n);
    }
  };

  [[nodiscard]] std::vector<std::pair<VertexId, std::vector<AgentId>>> contests_among(
      const std::vector<char>& moving) const {
    std::vector<std::pair<VertexId, std::vector<AgentId>>> out;
    const auto n = pos_.size();
    for (std::size_t a = 0; a < n; ++a) {
      if (!moving[a]) continue;
      const VertexId v = intended(static_cast<AgentId>(a));
      auto it = std::find_if(out.begin(), out.end(), [&](const auto& g) { return g.first == v; });
      if (it == out.end()) {
        out.push_back({v, {static_cast<AgentId>(a)}});
      } else {
        it->second.push_back(static_cast<AgentId>(a));
      }
    }
    std::erase_if(out, [](const auto& g) { return g.second.size() < 2; });
    std::sort(out.begin(), out.end());
    return out;
  }

  template <typename Block>
  void resolve_contest(int t, VertexId v, const std::vector<AgentId>& group, const Chooser& choose,
                       Block& block) {
    switch (protocol_) {
      case Protocol::NoComm: {
        AgentId w = choose ? choose(t, v, group) : kNoAgent;
        if (w == kNoAgent) w = tie_break(policy_, group, delays_, rng_);
        if (std::find(group.begin(), group.end(), w) == group.end())
          throw Error("contention winner is not a contender at turn " + std::to_string(t));
        for (AgentId a : group)
          if (a != w) block(a, DelayReason::PriorityLoss, v, w);
        return;
      }
      case Protocol::Cbm: {
        std::vector<AgentId> late;
        for (AgentId a : group)
          if (delays_[a] >= 1) late.push_back(a);
        if (late.empty()) {
          for (AgentId a : group) block(a, DelayReason::UnhealthyTarget, v, kNoAgent);
          return;
        }
        const AgentId w = late.size() == 1 ? late.front() : tie_break(policy_, late, delays_, rng_);
        for (AgentId a : group) {
          if (a == w) continue;
          block(a, delays_[a] >= 1 ? DelayReason::TieBreak : DelayReason::UnhealthyTarget, v, w);
        }
        return;
      }
      case Protocol::Ucbm: {
        int best = delays_[group.front()];
        for (AgentId a : group) best = std::min(best, delays_[a]);
        std::vector<AgentId> lowest;
        for (AgentId a : group)
          if (delays_[a] == best) lowest.push_back(a);
        const AgentId w =
            lowest.size() == 1 ? lowest.front() : tie_break(policy_, lowest, delays_, rng_);
        for (AgentId a : group) {
          if (a == w) continue;
          block(a, delays_[a] == best ? DelayReason::TieBreak : DelayReason::PriorityLoss, v, w);
        }
        return;
      }
      case Protocol::Ccbm:
        throw std::logic_error("counter integrity failure: two agents cleared to enter vertex " +
                               std::to_string(v) + " at turn " + std::to_string(t));
    }
  }

  const Instance* inst_;
  Protocol protocol_;
  TieBreakPolicy policy_;
  Rng rng_;
  std::vector<std::vector<VertexId>> orig_;
  std::vector<std::vector<VertexId>> rows_;
  int mu0_ = 0;
  int turn_ = 1;
  std::vector<VertexId> pos_;
  std::vector<int> progress_;
  std::vector<int> delays_;
  std::vector<AgentId> occ_;
  std::vector<int> counters_;
  std::vector<std::vector<int>> expected_;
  Scratch scratch_;
};

/// Watches a run for states from which no completion is possible.
class DeadlockDetector {
 public:
  /// `window` bounds how far back a repeated state may lie (0: unbounded).
  explicit DeadlockDetector(int window = 0) : window_(window) {}

  /// Call after every turn. `advanced`: some progress pointer moved.
  /// `forced`: the turn had a malfunction. `adversary_idle`: nothing
  /// scripted remains for later turns, so the dynamics are autonomous.
  bool observe(const Simulator& sim, bool advanced, bool forced, bool adversary_idle) {
    if (sim.completed()) return false;
    if (advanced) {
      streak_ = 0;
    } else if (!forced) {
      ++streak_;
    }
    if (streak_ >= static_cast<int>(sim.num_agents()) + 1 && !sim.all_on_target()) return true;
    if (!adversary_idle) {
      seen_.clear();
      return false;
    }
    key_.clear();
    sim.append_key(key_);
    const int now = sim.turn() - 1;
    auto [it, fresh] = seen_.emplace(key_, now);
    if (!fresh) {
      if (window_ == 0 || now - it->second <= window_) return true;
      it->second = now;
    }
    return false;
  }

  [[nodiscard]] int streak() const { return streak_; }

 private:
  int window_;
  int streak_ = 0;
  std::map<std::vector<int>, int> seen_;
  std::vector<int> key_;
};

struct RunOptions {
  std::vector<PriorityChoice> priorities;  // scripted no-communication choices
  std::optional<int> budget;               // default: mu + k + 2|V|
  int deadlock_window = 0;
  bool record_trace = true;
  bool record_counters = false;
  bool check_input = true;
};

enum class Outcome { Completed, Deadlock, BudgetExhausted };

inline std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::Completed: return "completed";
    case Outcome::Deadlock: return "deadlock";
    case Outcome::BudgetExhausted: return "budget-exhausted";
  }
  return "?";
}

struct RunResult {
  Schedule final_schedule;
  int makespan = -1;  // -1 unless completed
  Outcome outcome = Outcome::Completed;
  int outcome_turn = 0;
  std::vector<TurnPhaseRecord> trace;
  std::vector<int> delay_counts;
  std::vector<std::vector<int>> counter_history;  // after turn 0, 1, ...
  std::size_t unconsumed_events = 0;
  int budget = 0;

  [[nodiscard]] int max_delay_count() const {
    return delay_counts.empty() ? 0 : *std::max_element(delay_counts.begin(), delay_counts.end());
  }
};

inline int default_budget(const Instance& inst, const Schedule& sched, const MalfunctionPlan& plan) {
  return sched.length() + plan.k() + 2 * static_cast<int>(inst.graph.num_vertices());
}

/// Plays `sched` under `plan` until completion, deadlock or budget.
/// Several events on one agent in one turn are queued onto later turns.
inline RunResult run(const Instance& inst, const Schedule& sched, const MalfunctionPlan& plan,
                     Protocol protocol, const TieBreakPolicy& policy, const RunOptions& opt = {}) {
  if (opt.check_input) {
    if (auto bad = validate_instance(inst); !bad.empty())
      throw Error("invalid instance: " + bad.front().detail);
    auto verdict = check_feasible(inst, sched);
    if (!verdict)
      throw Error("input schedule is infeasible: " + verdict.rule + " at turn " +
                  std::to_string(verdict.turn));
  }
  for (std::size_t i = 0; i < plan.events.size(); ++i) {
    const auto& ev = plan.events[i];
    if (ev.turn < 1 || ev.agent < 0 || static_cast<std::size_t>(ev.agent) >= inst.num_agents())
      throw Error("malfunction event " + std::to_string(i) + " is out of range");
    if (i > 0 && ev.turn < plan.events[i - 1].turn)
      throw Error("malfunction events out of order at position " + std::to_string(i));
  }
  const int budget = opt.budget.value_or(default_budget(inst, sched, plan));

  Simulator sim(inst, sched, protocol, policy);
  DeadlockDetector detector(opt.deadlock_window);
  RunResult res;
  res.budget = budget;
  const auto n = inst.num_agents();
  std::vector<int> pending(n, 0);
  std::vector<char> forced(n, 0);
  std::size_t next_event = 0;
  int last_priority_turn = 0;
  for (const auto& p : opt.priorities) last_priority_turn = std::max(last_priority_turn, p.turn);

  Chooser chooser;
  if (!opt.priorities.empty()) {
    chooser = [&](int t, VertexId v, std::span<const AgentId> group) -> AgentId {
      for (const auto& p : opt.priorities)
        if (p.turn == t && p.vertex == v &&
            std::find(group.begin(), group.end(), p.winner) != group.end())
          return p.winner;
      return kNoAgent;
    };
  }

  if (opt.record_counters) res.counter_history.push_back(sim.counters());
  int pending_total = 0;
  while (!sim.completed()) {
    const int t = sim.turn();
    if (t > budget) {
      res.outcome = Outcome::BudgetExhausted;
      res.outcome_turn = budget;
      break;
    }
    while (next_event < plan.events.size() && plan.events[next_event].turn == t) {
      ++pending[plan.events[next_event].agent];
      ++pending_total;
      ++next_event;
    }
    bool any_forced = false;
    for (std::size_t a = 0; a < n; ++a) {
      forced[a] = pending[a] > 0 ? 1 : 0;
      if (forced[a]) {
        --pending[a];
        --pending_total;
        any_forced = true;
      }
    }
    TurnPhaseRecord rec;
    const bool advanced = sim.step(forced, chooser, opt.record_trace ? &rec : nullptr);
    if (opt.record_trace) res.trace.push_back(std::move(rec));
    if (opt.record_counters) res.counter_history.push_back(sim.counters());
    const bool idle =
        pending_total == 0 && next_event == plan.events.size() && t >= last_priority_turn;
    if (detector.observe(sim, advanced, any_forced, idle)) {
      res.outcome = Outcome::Deadlock;
      res.outcome_turn = t;
      break;
    }
  }
  res.unconsumed_events = static_cast<std::size_t>(pending_total) + (plan.events.size() - next_event);
  res.final_schedule = sim.executed();
  res.delay_counts = sim.delay_counts();
  if (sim.completed()) {
    res.outcome = Outcome::Completed;
    res.makespan = sim.length();
    res.outcome_turn = sim.length();
  }
  return res;
}

}  // namespace mapfma
