#include "rem/sim.hpp"

#include <algorithm>
#include <exception>
#include <stdexcept>

namespace rem {

namespace {

std::vector<NodeId> dispatch_order(const Scenario& s, const Plan& p) {
  std::vector<NodeId> order;
  auto push = [&](const NodeId& id) {
    if (p.count_for(id) > 0 && std::find(order.begin(), order.end(), id) == order.end())
      order.push_back(id);
  };
  for (const auto& step : p.trace) push(step.chosen);
  for (const auto& n : s.nodes) push(n.node_id);
  return order;
}

bool all_single_char(const std::vector<NodeId>& ids) {
  return std::all_of(ids.begin(), ids.end(), [](const NodeId& id) { return id.size() == 1; });
}

std::vector<NodeId> split_ids(const Scenario& s, std::string_view body, std::string_view token) {
  std::vector<NodeId> ids;
  if (body.empty()) throw std::invalid_argument("empty case '" + std::string(token) + "'");
  if (body.find('+') != std::string_view::npos) {
    std::size_t start = 0;
    while (start <= body.size()) {
      const auto end = std::min(body.find('+', start), body.size());
      ids.emplace_back(body.substr(start, end - start));
      start = end + 1;
    }
  } else if (s.find_node(NodeId(body)) != nullptr) {
    ids.emplace_back(body);
  } else {
    for (char c : body) ids.emplace_back(1, c);
  }
  for (const auto& id : ids) {
    if (s.find_node(id) == nullptr)
      throw std::invalid_argument("case '" + std::string(token) + "' names unknown node '" + id + "'");
  }
  return ids;
}

template <typename Body>
void for_each_case(std::size_t n, Body&& body, bool parallel) {
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<SimReport> run_cases(const Scenario& s, const std::vector<Case>& cases,
                                 const SimOptions& options, bool parallel) {
  std::vector<SimReport> reports(cases.size());
  for_each_case(
      cases.size(),
      [&](std::size_t i) {
        const Plan plan = make_plan(s, cases[i].policy, options.variant);
        reports[i] = simulate(s, plan, options, cases[i].label);
      },
      parallel);
  return reports;
}

}  // namespace

SimReport simulate(const Scenario& s, const Plan& p, const SimOptions& options, std::string label) {
  if (p.assigned_total() != s.request.num_objects) {
    throw std::invalid_argument("plan assigns " + std::to_string(p.assigned_total()) +
                                " objects but the request has " +
                                std::to_string(s.request.num_objects));
  }
  const CostModel model(s, options.variant);
  for (const auto& [id, wp] : p.assignments) {
    if (!model.has_node(id)) throw std::invalid_argument("plan references unknown node '" + id + "'");
    if (wp < 0) throw std::invalid_argument("plan assigns a negative count to '" + id + "'");
  }

  SimReport report;
  report.case_label = std::move(label);
  report.excluded = p.excluded;
  report.dispatch_order = dispatch_order(s, p);

  Seconds uplink_free = 0.0;
  for (const auto& id : report.dispatch_order) {
    WorkerTimeline t;
    t.objects = p.count_for(id);
    t.stages = model.get_time(id, t.objects);
    const Seconds start = options.uplink == UplinkMode::serialized ? uplink_free : 0.0;
    const Seconds sent = start + t.stages.pack + t.stages.request_send;
    if (options.uplink == UplinkMode::serialized) uplink_free = sent;
    t.queue_wait = start;
    t.deploy_span = sent + t.stages.unpack;
    t.finish_at = t.deploy_span + t.stages.process + t.stages.output_pack +
                  t.stages.output_send + t.stages.output_unpack;
    t.proc_resp_span = t.finish_at - t.deploy_span;
    if (report.critical_worker.empty() || t.finish_at > report.makespan) {
      report.makespan = t.finish_at;
      report.critical_worker = id;
    }
    report.per_worker.emplace(id, t);
  }
  const auto& critical = report.per_worker.at(report.critical_worker);
  report.deploy_s = critical.deploy_span;
  report.proc_resp_s = critical.proc_resp_span;
  return report;
}

std::string subset_label(const Scenario& s, const std::vector<NodeId>& ids) {
  // Scenario node order, so "TMFEC" reads the same way everywhere.
  std::vector<NodeId> ordered;
  for (const auto& n : s.nodes) {
    if (std::find(ids.begin(), ids.end(), n.node_id) != ids.end()) ordered.push_back(n.node_id);
  }
  std::string label;
  const bool compact = all_single_char(ordered);
  for (const auto& id : ordered) {
    if (!compact && !label.empty()) label += '+';
    label += id;
  }
  return label;
}

Case parse_case(const Scenario& s, std::string_view token) {
  const std::string label(token);
  if (token == "REM") return Case{label, RemGreedy{s.node_ids()}};
  if (token.substr(0, 2) == "A.") return Case{label, RemGreedy{split_ids(s, token.substr(2), token)}};
  auto ids = split_ids(s, token, token);
  if (ids.size() == 1) {
    if (ids.front() == s.delegator) return Case{label, LocalOnly{}};
    return Case{label, Mono{ids.front()}};
  }
  return Case{label, EqualSplit{std::move(ids)}};
}

std::vector<Case> power_set_cases(const Scenario& s) {
  const auto ids = s.node_ids();
  const std::size_t n = ids.size();
  if (n > 20) throw std::invalid_argument("power set over more than 20 nodes");
  std::vector<std::vector<NodeId>> subsets;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    std::vector<NodeId> subset;
    for (std::size_t j = 0; j < n; ++j) {
      if (mask & (1u << j)) subset.push_back(ids[j]);
    }
    subsets.push_back(std::move(subset));
  }
  std::stable_sort(subsets.begin(), subsets.end(),
                   [](const auto& a, const auto& b) { return a.size() < b.size(); });
  std::vector<Case> cases;
  for (const auto& subset : subsets) {
    const auto label = subset_label(s, subset);
    if (subset.size() == 1) {
      cases.push_back(parse_case(s, label));
    } else {
      cases.push_back(Case{label, EqualSplit{subset}});
      cases.push_back(Case{"A." + label, RemGreedy{subset}});
    }
  }
  return cases;
}

std::vector<SimReport> compare(const Scenario& s, const std::vector<Case>& cases,
                               const SimOptions& options) {
  return run_cases(s, cases, options, true);
}

std::vector<SimReport> compare_serial(const Scenario& s, const std::vector<Case>& cases,
                                      const SimOptions& options) {
  return run_cases(s, cases, options, false);
}

}  // namespace rem
