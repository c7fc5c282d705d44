#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rem/sim.hpp"
#include "support/random_scenario.hpp"

using namespace rem;

namespace {

bool close_rel(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(std::abs(b), 1e-300); }

}  // namespace

// Finish times from tests/oracles/table2_greedy.py.
TEST(Simulate, FixtureRemSerializedUplink) {
  const Scenario s = remtest::table2();
  const SimReport r = simulate(s, rem_assign(s, s.node_ids()), {}, "REM");
  EXPECT_EQ(r.dispatch_order, (std::vector<NodeId>{"T", "F", "E", "M"}));
  EXPECT_NEAR(r.per_worker.at("T").finish_at, 12.489000000000001, 1e-9);
  EXPECT_NEAR(r.per_worker.at("F").finish_at, 13.756989406235688, 1e-9);
  EXPECT_NEAR(r.per_worker.at("E").finish_at, 19.086602236414183, 1e-9);
  EXPECT_NEAR(r.per_worker.at("M").finish_at, 22.446131195684153, 1e-9);
  EXPECT_NEAR(r.makespan, 22.446131195684153, 1e-9);
  EXPECT_EQ(r.critical_worker, "M");
  EXPECT_EQ(r.excluded, (std::set<NodeId>{"C"}));
  EXPECT_EQ(r.per_worker.count("C"), 0u);
  EXPECT_EQ(r.case_label, "REM");
}

TEST(Simulate, SpansAddUpAndUplinkQueues) {
  const Scenario s = remtest::table2();
  const SimReport r = simulate(s, rem_assign(s, s.node_ids()));
  Seconds uplink = 0.0;
  for (const auto& id : r.dispatch_order) {
    const auto& w = r.per_worker.at(id);
    EXPECT_DOUBLE_EQ(w.queue_wait, uplink);
    uplink += w.stages.pack + w.stages.request_send;
    EXPECT_NEAR(w.deploy_span, uplink + w.stages.unpack, 1e-12);
    EXPECT_NEAR(w.deploy_span + w.proc_resp_span, w.finish_at, 1e-12);
  }
  const auto& crit = r.per_worker.at(r.critical_worker);
  EXPECT_EQ(r.deploy_s, crit.deploy_span);
  EXPECT_EQ(r.proc_resp_s, crit.proc_resp_span);
}

TEST(Simulate, ParallelUplinkReproducesEstimates) {
  std::mt19937_64 rng(17);
  const SimOptions parallel{UplinkMode::parallel, FormulaVariant::time_inverted};
  for (int i = 0; i < 100; ++i) {
    const Scenario s = remtest::random_scenario(rng, {});
    const Plan p = rem_assign(s, s.node_ids());
    const SimReport r = simulate(s, p, parallel);
    for (const auto& [id, w] : r.per_worker) {
      EXPECT_EQ(w.queue_wait, 0.0);
      EXPECT_TRUE(close_rel(w.finish_at, p.estimates.at(id), 1e-9));
    }
    EXPECT_TRUE(close_rel(r.makespan, p.predicted_makespan, 1e-9));
  }
}

TEST(Simulate, SingletonPlansMatchGetTime) {
  const Scenario s = remtest::table2();
  const CostModel m(s);
  for (const auto& id : s.node_ids()) {
    for (auto uplink : {UplinkMode::serialized, UplinkMode::parallel}) {
      const Case c = parse_case(s, id);
      const SimReport r = simulate(s, make_plan(s, c.policy), {uplink, FormulaVariant::time_inverted});
      EXPECT_TRUE(close_rel(r.makespan, m.get_time(id, s.request.num_objects).total, 1e-9)) << id;
    }
  }
}

TEST(Simulate, SerializedNeverFasterThanParallel) {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 100; ++i) {
    const Scenario s = remtest::random_scenario(rng, {});
    const Plan p = rem_assign(s, s.node_ids());
    const double ser = simulate(s, p).makespan;
    const double par = simulate(s, p, {UplinkMode::parallel, FormulaVariant::time_inverted}).makespan;
    EXPECT_GE(ser, par * (1 - 1e-12));
  }
}

TEST(Simulate, RejectsInconsistentPlans) {
  const Scenario s = remtest::table2();
  Plan p = rem_assign(s, s.node_ids());
  p.assignments["T"] += 1;
  EXPECT_THROW(simulate(s, p), std::invalid_argument);
  Plan q;
  q.assignments["Q"] = s.request.num_objects;
  EXPECT_THROW(simulate(s, q), std::invalid_argument);
}

TEST(Cases, ParseTokens) {
  const Scenario s = remtest::table2();
  EXPECT_TRUE(std::holds_alternative<LocalOnly>(parse_case(s, "T").policy));
  EXPECT_EQ(std::get<Mono>(parse_case(s, "C").policy).target, "C");
  EXPECT_EQ(std::get<EqualSplit>(parse_case(s, "TMFEC").policy).participants,
            (std::vector<NodeId>{"T", "M", "F", "E", "C"}));
  EXPECT_EQ(std::get<RemGreedy>(parse_case(s, "A.TM").policy).candidates, (std::vector<NodeId>{"T", "M"}));
  EXPECT_EQ(std::get<RemGreedy>(parse_case(s, "REM").policy).candidates, s.node_ids());
  EXPECT_EQ(std::get<EqualSplit>(parse_case(s, "T+C").policy).participants, (std::vector<NodeId>{"T", "C"}));
  EXPECT_THROW(parse_case(s, "TX"), std::invalid_argument);
  EXPECT_THROW(parse_case(s, "A."), std::invalid_argument);
}

TEST(Cases, MultiCharacterIds) {
  Scenario s = remtest::table2();
  for (auto& n : s.nodes) n.node_id = n.node_id == "F" ? "fog3" : n.node_id;
  for (auto& c : s.contexts) c.node_id = c.node_id == "F" ? "fog3" : c.node_id;
  for (auto& l : s.links) {
    if (l.from == "F") l.from = "fog3";
    if (l.to == "F") l.to = "fog3";
    for (auto& h : l.hops)
      if (h == "F") h = "fog3";
  }
  ASSERT_TRUE(validate_scenario(s).empty());
  EXPECT_EQ(subset_label(s, {"fog3", "T"}), "T+fog3");
  EXPECT_EQ(std::get<Mono>(parse_case(s, "fog3").policy).target, "fog3");
  EXPECT_EQ(std::get<RemGreedy>(parse_case(s, "A.T+fog3").policy).candidates,
            (std::vector<NodeId>{"T", "fog3"}));
}

TEST(Cases, PowerSet) {
  const Scenario s = remtest::table2();
  const auto cases = power_set_cases(s);
  ASSERT_EQ(cases.size(), 5u + 2u * 26u);
  EXPECT_EQ(cases[0].label, "T");
  EXPECT_EQ(cases[4].label, "C");
  EXPECT_EQ(cases[5].label, "TM");
  EXPECT_TRUE(std::holds_alternative<EqualSplit>(cases[5].policy));
  EXPECT_EQ(cases[6].label, "A.TM");
  EXPECT_EQ(cases.back().label, "A.TMFEC");
}

TEST(Compare, ParallelMatchesSerial) {
  const Scenario s = remtest::table2();
  const auto cases = power_set_cases(s);
  EXPECT_EQ(compare(s, cases), compare_serial(s, cases));
  const SimOptions other{UplinkMode::parallel, FormulaVariant::literal};
  EXPECT_EQ(compare(s, cases, other), compare_serial(s, cases, other));
}

TEST(Compare, PropagatesErrors) {
  const Scenario s = remtest::table2();
  std::vector<Case> cases{parse_case(s, "T"), Case{"bad", Mono{"Q"}}};
  EXPECT_THROW(compare(s, cases), std::invalid_argument);
}
