#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "rem/assign.hpp"
#include "rem/cost.hpp"
#include "rem/model.hpp"

namespace rem {

// serialized: the delegator packs and sends one package at a time over its
// single uplink. parallel: every package starts at t = 0, which reproduces
// the independent-worker view of the cost model.
enum class UplinkMode { serialized, parallel };

struct SimOptions {
  UplinkMode uplink = UplinkMode::serialized;
  FormulaVariant variant = FormulaVariant::time_inverted;
};

struct WorkerTimeline {
  std::int64_t objects = 0;
  CostBreakdown stages;
  Seconds queue_wait = 0.0;      // time the package waited for the uplink
  Seconds deploy_span = 0.0;     // t = 0 until the worker finished unpacking
  Seconds proc_resp_span = 0.0;  // unpack done until output unpacked at receiver
  Seconds finish_at = 0.0;

  bool operator==(const WorkerTimeline&) const = default;
};

struct SimReport {
  std::string case_label;
  std::map<NodeId, WorkerTimeline> per_worker;  // workers with wp > 0
  std::vector<NodeId> dispatch_order;
  NodeId critical_worker;  // the worker that finishes last
  Seconds makespan = 0.0;
  Seconds deploy_s = 0.0;     // critical worker's deploy span
  Seconds proc_resp_s = 0.0;  // critical worker's process & response span
  std::set<NodeId> excluded;

  bool operator==(const SimReport&) const = default;
};

// Runs the plan through a deterministic timeline. Stage durations are the
// cost model's terms at each worker's count.
SimReport simulate(const Scenario& s, const Plan& p, const SimOptions& options = {},
                   std::string label = {});

struct Case {
  std::string label;
  AssignmentPolicy policy;
};

// Case notation: single node letter -> local or mono migration ("T", "C"),
// several letters -> equal split ("TMFEC"), "A." prefix -> REM over those
// nodes ("A.TM"), "REM" -> REM over every node. Node ids longer than one
// character are joined with '+' ("A.fog3+fog4").
Case parse_case(const Scenario& s, std::string_view token);
std::string subset_label(const Scenario& s, const std::vector<NodeId>& ids);

// Every non-empty subset of the scenario's nodes: singletons as local/mono
// cases, larger subsets as an equal-split case followed by its REM case.
std::vector<Case> power_set_cases(const Scenario& s);

// One report per case, in input order.
std::vector<SimReport> compare(const Scenario& s, const std::vector<Case>& cases,
                               const SimOptions& options = {});
std::vector<SimReport> compare_serial(const Scenario& s, const std::vector<Case>& cases,
                                      const SimOptions& options = {});

}  // namespace rem
