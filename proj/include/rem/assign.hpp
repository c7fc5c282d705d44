#pragma once

#include <cstdint>
#include <stdexcept>
#include <variant>
#include <vector>

#include "rem/cost.hpp"
#include "rem/model.hpp"

namespace rem {

struct RemGreedy {
  std::vector<NodeId> candidates;
};
struct LocalOnly {};
struct Mono {
  NodeId target;
};
struct EqualSplit {
  std::vector<NodeId> participants;
};

using AssignmentPolicy = std::variant<RemGreedy, LocalOnly, Mono, EqualSplit>;

class StateSpaceExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Greedy assignment: every object goes to the worker whose current estimate
// is the smallest (ties to the lowest node_id), then that worker's estimate
// is recomputed with one more object.
Plan rem_assign(const Scenario& s, const std::vector<NodeId>& candidates,
                FormulaVariant variant = FormulaVariant::time_inverted);
Plan rem_assign(const CostModel& model, std::int64_t num_objects,
                const std::vector<NodeId>& candidates);

// local_only, mono and equal_split. RemGreedy is rejected here; use make_plan.
Plan baseline_assign(const Scenario& s, const AssignmentPolicy& policy,
                     FormulaVariant variant = FormulaVariant::time_inverted);
Plan baseline_assign(const CostModel& model, const Scenario& s, const AssignmentPolicy& policy);

// Dispatches to rem_assign or baseline_assign.
Plan make_plan(const Scenario& s, const AssignmentPolicy& policy,
               FormulaVariant variant = FormulaVariant::time_inverted);

// Exhaustive search over every split of #D objects across the candidates.
// Minimizes the largest estimate among workers that receive objects; ties go
// to the lexicographically smallest count vector (candidates in ascending
// node_id order). The parallel kernel returns exactly what the serial
// reference returns.
Plan brute_force_optimal(const Scenario& s, const std::vector<NodeId>& candidates,
                         std::uint64_t cap, FormulaVariant variant = FormulaVariant::time_inverted);
Plan brute_force_optimal_serial(const Scenario& s, const std::vector<NodeId>& candidates,
                                std::uint64_t cap,
                                FormulaVariant variant = FormulaVariant::time_inverted);

// C(objects + workers - 1, workers - 1), saturating at UINT64_MAX.
std::uint64_t composition_count(std::int64_t objects, std::size_t workers);

// Sorted, de-duplicated copy; throws std::invalid_argument if empty.
std::vector<NodeId> normalize_candidates(const std::vector<NodeId>& ids);

}  // namespace rem
