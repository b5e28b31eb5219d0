#include <gtest/gtest.h>

#include "mapfma/engine.hpp"
#include "mapfma/instances.hpp"
#include "support/oracles.hpp"

using namespace mapfma;

namespace {

const Protocol kAll[] = {Protocol::NoComm, Protocol::Cbm, Protocol::Ucbm, Protocol::Ccbm};

MalfunctionPlan plan_of(const Instance& inst, std::vector<std::pair<int, const char*>> ev) {
  std::vector<MalfunctionEvent> out;
  for (auto& [t, l] : ev) out.push_back({t, inst.agent_by_label(l)});
  return scripted_plan(inst, out);
}

}  // namespace

TEST(Engine, EmptyPlanReproducesSchedule) {
  for (auto gen : {gen_fig1(), gen_fig2(), gen_grid(3, 3, 3, 2)}) {
    for (Protocol p : kAll) {
      auto res = run(gen.instance, gen.schedule, {}, p, {});
      EXPECT_EQ(res.outcome, Outcome::Completed);
      EXPECT_EQ(res.final_schedule, gen.schedule) << to_string(p);
      EXPECT_EQ(res.makespan, gen.schedule.length());
    }
  }
}

TEST(Engine, Fig1CbmSingleMalfunction) {
  auto [inst, s] = gen_fig1();
  auto res = run(inst, s, plan_of(inst, {{1, "a2"}}), Protocol::Cbm, {});
  ASSERT_EQ(res.outcome, Outcome::Completed);
  EXPECT_EQ(res.makespan, 3);
  EXPECT_TRUE(check_feasible(inst, res.final_schedule));
  ASSERT_GE(res.trace.size(), 2u);
  const auto& t2 = res.trace[1];
  ASSERT_EQ(t2.modifications.size(), 1u);
  EXPECT_EQ(t2.modifications[0].agent, inst.agent_by_label("a1"));
  EXPECT_EQ(t2.modifications[0].reason, DelayReason::UnhealthyTarget);
  EXPECT_EQ(res.delay_counts, (std::vector<int>{1, 1}));
}

TEST(Engine, CbmHealthinessOnFig1) {
  auto [inst, s] = gen_fig1();
  Simulator sim(inst, s, Protocol::Cbm, {});
  std::vector<char> forced = {0, 1};
  sim.step(forced, {}, nullptr);
  std::vector<char> none = {0, 0};
  EXPECT_FALSE(sim.cbm_is_healthy(inst.agent_by_label("a1"), none));
  EXPECT_FALSE(sim.cbm_is_healthy(inst.agent_by_label("a2"), none));

  Simulator fresh(inst, s, Protocol::Cbm, {});
  EXPECT_TRUE(fresh.cbm_is_healthy(inst.agent_by_label("a2"), none));
  // a1 stays at turn 1: nothing to check.
  EXPECT_TRUE(fresh.cbm_is_healthy(inst.agent_by_label("a1"), none));
}

TEST(Engine, CbmOccupantAnnouncingDelayIsUnhealthy) {
  // Path 0-1-2: a at 0 follows b at 1; b malfunctions.
  Instance inst{Graph(3), {{0, 0, 1, "a"}, {1, 1, 2, "b"}}, 1};
  inst.graph.add_edge(0, 1);
  inst.graph.add_edge(1, 2);
  Schedule s({{0, 1}, {1, 2}});
  Simulator sim(inst, s, Protocol::Cbm, {});
  std::vector<char> forced = {0, 1};
  EXPECT_FALSE(sim.cbm_is_healthy(0, forced));
  std::vector<char> none = {0, 0};
  EXPECT_TRUE(sim.cbm_is_healthy(0, none));
  TurnPhaseRecord rec;
  sim.step(forced, {}, &rec);
  ASSERT_EQ(rec.modifications.size(), 2u);
  EXPECT_EQ(rec.modifications[1].reason, DelayReason::UnhealthyTarget);
}

TEST(Engine, CbmHeadOnDelayedPairResolvedByPolicy) {
  // Star centre 1; a crosses 0-1-2, b crosses 3-1-4 one turn later. After
  // a is delayed twice and b once, both want the centre in turn 3.
  Instance inst{Graph(5), {{0, 0, 2, "a"}, {1, 3, 4, "b"}}, 0};
  for (VertexId leaf : {0, 2, 3, 4}) inst.graph.add_edge(1, leaf);
  Schedule s({{0, 1, 2, 2}, {3, 3, 1, 4}});
  ASSERT_TRUE(check_feasible(inst, s));
  for (auto kind : {TieBreakPolicy::Kind::LowestId, TieBreakPolicy::Kind::HighestD,
                    TieBreakPolicy::Kind::SeededRandom}) {
    auto res =
        run(inst, s, scripted_plan(inst, {{1, 0}, {1, 1}, {2, 0}}), Protocol::Cbm, {kind, 3});
    EXPECT_EQ(res.outcome, Outcome::Completed);
    EXPECT_TRUE(check_feasible(inst, res.final_schedule));
    ASSERT_GE(res.trace.size(), 3u);
    int tie_losers = 0;
    for (const auto& m : res.trace[2].modifications)
      tie_losers += m.reason == DelayReason::TieBreak ? 1 : 0;
    EXPECT_EQ(tie_losers, 1);
  }
}

TEST(Engine, UcbmPriority) {
  Rng rng(0);
  TieBreakPolicy lowest{};
  EXPECT_EQ(ucbm_priority(4, 0, 2, 2, lowest, rng), 4);
  EXPECT_EQ(ucbm_priority(4, 1, 2, 1, lowest, rng), 2);
  EXPECT_EQ(ucbm_priority(0, 3, 1, 1, lowest, rng), 1);
}

TEST(Engine, CcbmExpectedCounts) {
  auto [inst, s] = gen_fig1();
  auto l = ccbm_expected_counts(inst, s);
  const AgentId a1 = inst.agent_by_label("a1");
  const AgentId a2 = inst.agent_by_label("a2");
  EXPECT_EQ(l[a2][1], 1);  // a2 is the first visitor of u2
  EXPECT_EQ(l[a1][2], 2);  // a1 the second
  EXPECT_EQ(l[a1][0], l[a1][1]);  // staying does not re-count
  Instance single{Graph(3), {{0, 0, 2, "a"}}, 2};
  single.graph.add_edge(0, 1);
  single.graph.add_edge(1, 2);
  EXPECT_EQ(ccbm_expected_counts(single, Schedule({{0, 1, 2}}))[0], (std::vector<int>{1, 1, 1}));
}

TEST(Engine, CcbmFig1WaitsForCounter) {
  auto [inst, s] = gen_fig1();
  Simulator sim(inst, s, Protocol::Ccbm, {});
  std::vector<char> forced = {0, 1};
  sim.step(forced, {}, nullptr);
  EXPECT_FALSE(sim.ccbm_counter_permits(inst.agent_by_label("a1")));
  EXPECT_TRUE(sim.ccbm_counter_permits(inst.agent_by_label("a2")));
  RunOptions opt;
  opt.record_counters = true;
  auto res = run(inst, s, plan_of(inst, {{1, "a2"}}), Protocol::Ccbm, {}, opt);
  ASSERT_EQ(res.outcome, Outcome::Completed);
  EXPECT_LE(res.makespan, 3);
  auto replay = oracle::spell_counts(inst.graph.num_vertices(), res.final_schedule.rows());
  EXPECT_EQ(res.counter_history, replay);
}

TEST(Engine, Fig1NoCommDeadlock) {
  auto [inst, s] = gen_fig1();
  RunOptions opt;
  opt.priorities = {{2, inst.vertex_by_label("u2"), inst.agent_by_label("a1")}};
  auto res = run(inst, s, plan_of(inst, {{1, "a2"}}), Protocol::NoComm, {}, opt);
  EXPECT_EQ(res.outcome, Outcome::Deadlock);
  EXPECT_LE(res.outcome_turn, 6);
  opt.priorities = {{2, inst.vertex_by_label("u2"), inst.agent_by_label("a2")}};
  res = run(inst, s, plan_of(inst, {{1, "a2"}}), Protocol::NoComm, {}, opt);
  EXPECT_EQ(res.outcome, Outcome::Completed);
}

TEST(Engine, Fig2NoCommLargeDelay) {
  auto [inst, s] = gen_fig2();
  ASSERT_TRUE(check_feasible(inst, s));
  RunOptions opt;
  opt.priorities = {{7, inst.vertex_by_label("c3"), inst.agent_by_label("b31")},
                    {8, inst.vertex_by_label("c3"), inst.agent_by_label("b32")}};
  auto res = run(inst, s, plan_of(inst, {{4, "a1"}}), Protocol::NoComm, {}, opt);
  ASSERT_EQ(res.outcome, Outcome::Completed);
  EXPECT_GE(res.makespan, 11);
  EXPECT_TRUE(check_feasible(inst, res.final_schedule));
}

TEST(Engine, ForcedDelayOnParkedAgentIsHarmless) {
  auto [inst, s] = gen_fig1();
  auto res = run(inst, s, plan_of(inst, {{2, "a2"}}), Protocol::Cbm, {});
  EXPECT_EQ(res.outcome, Outcome::Completed);
  EXPECT_EQ(res.delay_counts[inst.agent_by_label("a2")], 1);
  auto late = run(inst, s, plan_of(inst, {{9, "a2"}}), Protocol::Cbm, {});
  EXPECT_EQ(late.unconsumed_events, 1u);
  EXPECT_EQ(late.makespan, 2);
}

TEST(Engine, DuplicateEventsQueueOntoLaterTurns) {
  auto [inst, s] = gen_fig1();
  auto res = run(inst, s, plan_of(inst, {{1, "a2"}, {1, "a2"}}), Protocol::Ccbm, {});
  ASSERT_EQ(res.outcome, Outcome::Completed);
  EXPECT_EQ(res.delay_counts[inst.agent_by_label("a2")], 2);
  EXPECT_LE(res.makespan, 4);
}

TEST(Engine, RejectsInfeasibleInput) {
  auto [inst, s] = gen_fig1();
  auto bad = apply_delay1(s, std::vector<AgentId>{1}, 1);
  EXPECT_THROW(run(inst, bad, {}, Protocol::Cbm, {}), Error);
}
