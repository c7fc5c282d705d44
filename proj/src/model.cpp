#include "rem/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rem {

namespace {

constexpr double kPathSumTolerance = 1e-9;

bool positive(double x) { return std::isfinite(x) && x > 0.0; }

bool close_rel(double a, double b, double tol) {
  return std::fabs(a - b) <= tol * std::max({1.0, std::fabs(a), std::fabs(b)});
}

template <typename... Parts>
std::string cat(const Parts&... parts) {
  std::ostringstream out;
  (out << ... << parts);
  return out.str();
}

}  // namespace

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::edge_host: return "edge_host";
    case NodeKind::mist: return "mist";
    case NodeKind::fog: return "fog";
    case NodeKind::cloud: return "cloud";
  }
  return "unknown";
}

std::optional<NodeKind> parse_node_kind(std::string_view text) {
  for (auto k : {NodeKind::edge_host, NodeKind::mist, NodeKind::fog, NodeKind::cloud}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

std::string_view to_string(ResourceKind kind) {
  switch (kind) {
    case ResourceKind::cpu_benchmark: return "cpu_benchmark";
    case ResourceKind::cores_available: return "cores_available";
    case ResourceKind::ram_free: return "ram_free";
    case ResourceKind::cpu_idle_fraction: return "cpu_idle_fraction";
  }
  return "unknown";
}

std::optional<ResourceKind> parse_resource_kind(std::string_view text) {
  for (auto k : {ResourceKind::cpu_benchmark, ResourceKind::cores_available,
                 ResourceKind::ram_free, ResourceKind::cpu_idle_fraction}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

ResourceWeights ResourceWeights::uniform() {
  return ResourceWeights{{{ResourceKind::cpu_benchmark, 1.0},
                          {ResourceKind::cores_available, 1.0},
                          {ResourceKind::ram_free, 1.0},
                          {ResourceKind::cpu_idle_fraction, 1.0}}};
}

CostBreakdown CostBreakdown::from_terms(Seconds pack, Seconds request_send, Seconds unpack,
                                        Seconds process, Seconds output_pack,
                                        Seconds output_send, Seconds output_unpack) {
  CostBreakdown b{pack, request_send, unpack, process, output_pack, output_send, output_unpack, 0.0};
  b.total = b.sum_of_terms();
  return b;
}

Seconds CostBreakdown::sum_of_terms() const {
  return pack + request_send + unpack + process + output_pack + output_send + output_unpack;
}

std::int64_t Plan::assigned_total() const {
  std::int64_t sum = 0;
  for (const auto& [id, wp] : assignments) sum += wp;
  return sum;
}

std::int64_t Plan::count_for(const NodeId& id) const {
  auto it = assignments.find(id);
  return it == assignments.end() ? 0 : it->second;
}

const NodeProfile* Scenario::find_node(const NodeId& id) const {
  auto it = std::find_if(nodes.begin(), nodes.end(),
                         [&](const NodeProfile& n) { return n.node_id == id; });
  return it == nodes.end() ? nullptr : &*it;
}

const DynamicContext* Scenario::find_context(const NodeId& id) const {
  auto it = std::find_if(contexts.begin(), contexts.end(),
                         [&](const DynamicContext& c) { return c.node_id == id; });
  return it == contexts.end() ? nullptr : &*it;
}

const LinkPath* Scenario::find_link(const NodeId& from, const NodeId& to) const {
  for (const auto& l : links) {
    if (l.from == from && l.to == to) return &l;
  }
  for (const auto& l : links) {
    if (l.from == to && l.to == from) return &l;
  }
  return nullptr;
}

std::vector<NodeId> Scenario::node_ids() const {
  std::vector<NodeId> ids;
  ids.reserve(nodes.size());
  for (const auto& n : nodes) ids.push_back(n.node_id);
  return ids;
}

std::optional<LinkPath> compose_path(const Scenario& s, const NodeId& from,
                                     const std::vector<NodeId>& hops, const NodeId& to) {
  LinkPath path{from, to, 0.0, 0.0, hops};
  NodeId prev = from;
  auto add_segment = [&](const NodeId& next) {
    const LinkPath* seg = s.find_link(prev, next);
    if (seg == nullptr || !seg->hops.empty()) return false;
    path.per_byte_time += seg->per_byte_time;
    path.fixed_latency += seg->fixed_latency;
    prev = next;
    return true;
  };
  for (const auto& h : hops) {
    if (!add_segment(h)) return std::nullopt;
  }
  if (!add_segment(to)) return std::nullopt;
  return path;
}

std::vector<std::string> validate_scenario(const Scenario& s) {
  std::vector<std::string> v;

  std::set<NodeId> ids;
  for (const auto& n : s.nodes) {
    const auto& id = n.node_id;
    if (id.empty()) v.push_back("node with empty node_id");
    if (!ids.insert(id).second) v.push_back(cat("duplicate node_id '", id, "'"));
    if (!positive(n.cpu_benchmark)) v.push_back(cat("node '", id, "': cpu_benchmark must be > 0"));
    if (n.cores_available < 1) v.push_back(cat("node '", id, "': cores_available must be >= 1"));
    if (n.ram_total == 0) v.push_back(cat("node '", id, "': ram_total must be > 0"));
    if (!positive(n.disk_read)) v.push_back(cat("node '", id, "': disk_read must be > 0"));
    if (!positive(n.disk_write)) v.push_back(cat("node '", id, "': disk_write must be > 0"));
  }
  auto known = [&](const NodeId& id) { return ids.count(id) != 0; };

  if (!known(s.delegator)) v.push_back(cat("delegator '", s.delegator, "' is not a known node"));

  std::set<NodeId> with_context;
  for (const auto& c : s.contexts) {
    const auto& id = c.node_id;
    const NodeProfile* p = s.find_node(id);
    if (p == nullptr) {
      v.push_back(cat("context references unknown node '", id, "'"));
      continue;
    }
    if (!with_context.insert(id).second) v.push_back(cat("duplicate context for node '", id, "'"));
    if (!(c.cpu_usage >= 0.0 && c.cpu_usage <= 1.0))
      v.push_back(cat("context '", id, "': cpu_usage must lie in [0, 1]"));
    if (c.ram_used > p->ram_total)
      v.push_back(cat("context '", id, "': ram_used exceeds ram_total"));
  }
  for (const auto& n : s.nodes) {
    if (!n.node_id.empty() && with_context.count(n.node_id) == 0)
      v.push_back(cat("node '", n.node_id, "' has no dynamic context"));
  }

  for (const auto& l : s.links) {
    const std::string name = cat("link ", l.from, "->", l.to);
    if (!known(l.from)) v.push_back(cat(name, ": unknown node '", l.from, "'"));
    if (!known(l.to)) v.push_back(cat(name, ": unknown node '", l.to, "'"));
    if (!positive(l.per_byte_time)) v.push_back(cat(name, ": per_byte_time must be > 0"));
    if (!(std::isfinite(l.fixed_latency) && l.fixed_latency >= 0.0))
      v.push_back(cat(name, ": fixed_latency must be >= 0"));
    if (l.hops.empty()) continue;
    bool hops_known = true;
    for (const auto& h : l.hops) {
      if (!known(h)) {
        v.push_back(cat(name, ": unknown hop '", h, "'"));
        hops_known = false;
      }
    }
    if (!hops_known || !known(l.from) || !known(l.to)) continue;
    auto composed = compose_path(s, l.from, l.hops, l.to);
    if (!composed) {
      v.push_back(cat(name, ": a hop segment has no direct link"));
    } else if (!close_rel(composed->per_byte_time, l.per_byte_time, kPathSumTolerance) ||
               !close_rel(composed->fixed_latency, l.fixed_latency, kPathSumTolerance)) {
      v.push_back(cat(name, ": timing differs from the sum of its hop segments"));
    }
  }

  const auto& r = s.request;
  if (r.num_objects < 1) v.push_back("request: num_objects must be >= 1");
  if (!known(r.receiver)) v.push_back(cat("request: receiver '", r.receiver, "' is not a known node"));
  if (!known(r.requester))
    v.push_back(cat("request: requester '", r.requester, "' is not a known node"));

  const auto& c = s.calibration;
  const std::pair<const char*, double> cal_fields[] = {
      {"t_upk_mdl", c.t_upk_mdl}, {"t_upk_alg", c.t_upk_alg}, {"t_pk_mdl", c.t_pk_mdl},
      {"t_pk_alg", c.t_pk_alg},   {"t_pk_d", c.t_pk_d},       {"t_upk_d", c.t_upk_d},
      {"t_pk_o1", c.t_pk_o1},     {"t_proc1", c.t_proc1},     {"t_upk_o1", c.t_upk_o1}};
  for (const auto& [name, value] : cal_fields) {
    if (!positive(value)) v.push_back(cat("calibration: ", name, " must be > 0"));
  }
  if (c.out_bytes_per_object == 0) v.push_back("calibration: out_bytes_per_object must be > 0");

  bool any_positive = false;
  for (const auto& w : s.weights.entries) {
    if (!(std::isfinite(w.weight) && w.weight >= 0.0))
      v.push_back(cat("weights: ", to_string(w.resource), " must be a finite value >= 0"));
    any_positive = any_positive || w.weight > 0.0;
  }
  if (!any_positive) v.push_back("weights: at least one weight must be > 0");

  if (known(s.delegator)) {
    for (const auto& n : s.nodes) {
      if (n.node_id == s.delegator) continue;
      if (s.find_link(s.delegator, n.node_id) == nullptr)
        v.push_back(cat("node '", n.node_id, "' is not reachable from delegator '", s.delegator, "'"));
    }
  }
  if (known(r.receiver)) {
    for (const auto& n : s.nodes) {
      if (n.node_id == r.receiver) continue;
      if (s.find_link(n.node_id, r.receiver) == nullptr)
        v.push_back(cat("node '", n.node_id, "' has no path to receiver '", r.receiver, "'"));
    }
  }
  return v;
}

}  // namespace rem
