#include "rem/assign.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rem {

namespace {

void require_known(const CostModel& model, const std::vector<NodeId>& ids) {
  for (const auto& id : ids) {
    if (!model.has_node(id)) throw std::invalid_argument("unknown node '" + id + "'");
  }
}

// Fills estimates, predicted makespan and exclusions from final counts.
void finish_plan(const CostModel& model, Plan& plan) {
  plan.estimates.clear();
  plan.excluded.clear();
  plan.predicted_makespan = 0.0;
  for (const auto& id : plan.candidates) {
    const auto wp = plan.count_for(id);
    plan.assignments[id] = wp;
    const double wt = model.get_time(id, wp).total;
    plan.estimates[id] = wt;
    if (wp > 0) {
      plan.predicted_makespan = std::max(plan.predicted_makespan, wt);
    } else {
      plan.excluded.insert(id);
    }
  }
}

// Per-candidate table of get_time totals for 0..objects.
using CostTable = std::vector<std::vector<double>>;

CostTable build_cost_table(const CostModel& model, const std::vector<NodeId>& ids,
                           std::int64_t objects) {
  CostTable table(ids.size(), std::vector<double>(static_cast<std::size_t>(objects) + 1));
  for (std::size_t j = 0; j < ids.size(); ++j) {
    for (std::int64_t w = 0; w <= objects; ++w) table[j][w] = model.get_time(ids[j], w).total;
  }
  return table;
}

struct Best {
  double makespan = std::numeric_limits<double>::infinity();
  std::vector<std::int64_t> counts;
};

// Enumerates positions [pos, n) in lexicographic order with `left` objects
// remaining. Candidates whose partial maximum already reaches the current
// best are skipped: they can never win under strict improvement.
void search_pruned(const CostTable& table, std::size_t pos, std::int64_t left, double partial,
                   std::vector<std::int64_t>& counts, Best& best) {
  const std::size_t n = table.size();
  if (partial >= best.makespan) return;
  if (pos + 1 == n) {
    counts[pos] = left;
    const double m = left > 0 ? std::max(partial, table[pos][left]) : partial;
    if (m < best.makespan) {
      best.makespan = m;
      best.counts = counts;
    }
    return;
  }
  for (std::int64_t w = 0; w <= left; ++w) {
    counts[pos] = w;
    const double p = w > 0 ? std::max(partial, table[pos][w]) : partial;
    search_pruned(table, pos + 1, left - w, p, counts, best);
  }
}

Plan plan_from_counts(const CostModel& model, const std::vector<NodeId>& ids,
                      const std::vector<std::int64_t>& counts) {
  Plan plan;
  plan.candidates = ids;
  for (std::size_t j = 0; j < ids.size(); ++j) plan.assignments[ids[j]] = counts[j];
  finish_plan(model, plan);
  return plan;
}

void check_cap(std::int64_t objects, std::size_t workers, std::uint64_t cap) {
  const auto states = composition_count(objects, workers);
  if (states > cap) {
    throw StateSpaceExceeded("brute force needs " + std::to_string(states) +
                             " states, cap is " + std::to_string(cap));
  }
}

}  // namespace

std::vector<NodeId> normalize_candidates(const std::vector<NodeId>& ids) {
  std::vector<NodeId> out = ids;
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.empty()) throw std::invalid_argument("candidate set is empty");
  return out;
}

std::uint64_t composition_count(std::int64_t objects, std::size_t workers) {
  if (workers == 0 || objects < 0) return 0;
  // C(objects + k, k) with k = workers - 1, built incrementally; every
  // intermediate value is itself a binomial coefficient, so after removing
  // gcd(acc, i) the factor (objects + i) divides evenly by the rest of i.
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t k = workers - 1;
  std::uint64_t acc = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    const std::uint64_t g = std::gcd(acc, i);
    const std::uint64_t factor = (static_cast<std::uint64_t>(objects) + i) / (i / g);
    acc /= g;
    if (acc > kMax / factor) return kMax;
    acc *= factor;
  }
  return acc;
}

Plan rem_assign(const CostModel& model, std::int64_t num_objects,
                const std::vector<NodeId>& candidates) {
  const auto ids = normalize_candidates(candidates);
  require_known(model, ids);
  if (num_objects < 1) throw std::invalid_argument("request must contain at least one object");

  Plan plan;
  plan.candidates = ids;
  std::map<NodeId, double> wt;
  for (const auto& id : ids) {
    plan.assignments[id] = 0;
    wt[id] = model.get_time(id, 0).total;
  }
  plan.trace.reserve(static_cast<std::size_t>(num_objects));
  for (std::int64_t step = 0; step < num_objects; ++step) {
    // std::map iterates in ascending node_id, so the first strict minimum
    // is the lowest id among ties.
    auto chosen = wt.begin();
    for (auto it = wt.begin(); it != wt.end(); ++it) {
      if (it->second < chosen->second) chosen = it;
    }
    plan.trace.push_back(TraceStep{static_cast<std::size_t>(step), chosen->first, wt});
    const auto wp = ++plan.assignments[chosen->first];
    chosen->second = model.get_time(chosen->first, wp).total;
  }
  finish_plan(model, plan);
  return plan;
}

Plan rem_assign(const Scenario& s, const std::vector<NodeId>& candidates, FormulaVariant variant) {
  return rem_assign(CostModel(s, variant), s.request.num_objects, candidates);
}

Plan baseline_assign(const CostModel& model, const Scenario& s, const AssignmentPolicy& policy) {
  const std::int64_t objects = s.request.num_objects;
  if (objects < 1) throw std::invalid_argument("request must contain at least one object");
  Plan plan;
  if (std::holds_alternative<LocalOnly>(policy)) {
    plan.candidates = {s.delegator};
    plan.assignments[s.delegator] = objects;
  } else if (const auto* mono = std::get_if<Mono>(&policy)) {
    plan.candidates = {mono->target};
    plan.assignments[mono->target] = objects;
  } else if (const auto* split = std::get_if<EqualSplit>(&policy)) {
    plan.candidates = normalize_candidates(split->participants);
    const auto n = static_cast<std::int64_t>(plan.candidates.size());
    const std::int64_t base = objects / n;
    const std::int64_t extra = objects % n;
    for (std::int64_t j = 0; j < n; ++j) {
      plan.assignments[plan.candidates[j]] = base + (j < extra ? 1 : 0);
    }
  } else {
    throw std::invalid_argument("baseline_assign does not handle the REM policy");
  }
  require_known(model, plan.candidates);
  finish_plan(model, plan);
  return plan;
}

Plan baseline_assign(const Scenario& s, const AssignmentPolicy& policy, FormulaVariant variant) {
  return baseline_assign(CostModel(s, variant), s, policy);
}

Plan make_plan(const Scenario& s, const AssignmentPolicy& policy, FormulaVariant variant) {
  const CostModel model(s, variant);
  if (const auto* rem = std::get_if<RemGreedy>(&policy)) {
    return rem_assign(model, s.request.num_objects, rem->candidates);
  }
  return baseline_assign(model, s, policy);
}

Plan brute_force_optimal_serial(const Scenario& s, const std::vector<NodeId>& candidates,
                                std::uint64_t cap, FormulaVariant variant) {
  const auto ids = normalize_candidates(candidates);
  const CostModel model(s, variant);
  require_known(model, ids);
  const std::int64_t objects = s.request.num_objects;
  check_cap(objects, ids.size(), cap);
  const auto table = build_cost_table(model, ids, objects);

  // Plain odometer over compositions in lexicographic order, no pruning.
  const std::size_t n = ids.size();
  std::vector<std::int64_t> counts(n, 0);
  counts[n - 1] = objects;
  Best best;
  while (true) {
    double m = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (counts[j] > 0) m = std::max(m, table[j][counts[j]]);
    }
    if (m < best.makespan) {
      best.makespan = m;
      best.counts = counts;
    }
    // Lexicographic successor over the free slots [0, n-1); the last slot
    // holds the remainder.
    std::int64_t& remainder = counts[n - 1];
    std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(n) - 2;
    for (; pos >= 0; --pos) {
      if (remainder > 0) {
        ++counts[pos];
        --remainder;
        break;
      }
      remainder += counts[pos];
      counts[pos] = 0;
    }
    if (pos < 0) break;
  }
  return plan_from_counts(model, ids, best.counts);
}

Plan brute_force_optimal(const Scenario& s, const std::vector<NodeId>& candidates,
                         std::uint64_t cap, FormulaVariant variant) {
  const auto ids = normalize_candidates(candidates);
  const CostModel model(s, variant);
  require_known(model, ids);
  const std::int64_t objects = s.request.num_objects;
  check_cap(objects, ids.size(), cap);
  const auto table = build_cost_table(model, ids, objects);
  const std::size_t n = ids.size();

  if (n == 1) return plan_from_counts(model, ids, {objects});

  // One chunk per value of the first count; chunks are merged in ascending
  // order so the result matches a single lexicographic sweep.
  std::vector<Best> chunk(static_cast<std::size_t>(objects) + 1);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t first = 0; first <= objects; ++first) {
    std::vector<std::int64_t> counts(n, 0);
    counts[0] = first;
    const double partial = first > 0 ? table[0][first] : 0.0;
    search_pruned(table, 1, objects - first, partial, counts, chunk[first]);
  }
  Best best;
  for (auto& c : chunk) {
    if (!c.counts.empty() && c.makespan < best.makespan) best = std::move(c);
  }
  return plan_from_counts(model, ids, best.counts);
}

}  // namespace rem
