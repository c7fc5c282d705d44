#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rem {

using NodeId = std::string;
using Bytes = std::uint64_t;
using Seconds = double;

enum class NodeKind { edge_host, mist, fog, cloud };

std::string_view to_string(NodeKind kind);
std::optional<NodeKind> parse_node_kind(std::string_view text);

// Static specification of one participant. Disk speeds are bytes/second.
struct NodeProfile {
  NodeId node_id;
  NodeKind kind = NodeKind::fog;
  double cpu_benchmark = 0.0;
  int cores_available = 1;
  Bytes ram_total = 0;
  double disk_read = 0.0;
  double disk_write = 0.0;

  bool operator==(const NodeProfile&) const = default;
};

// Runtime state of one participant, frozen at planning time.
struct DynamicContext {
  NodeId node_id;
  double cpu_usage = 0.0;  // fraction in [0, 1]
  Bytes ram_used = 0;
  double sampled_at = 0.0;  // monotonic seconds

  bool operator==(const DynamicContext&) const = default;
};

// Network path between two nodes. When `hops` is non-empty the path runs
// from -> hops... -> to and its timing is the sum of the hop segments.
struct LinkPath {
  NodeId from;
  NodeId to;
  double per_byte_time = 0.0;  // seconds/byte
  Seconds fixed_latency = 0.0;
  std::vector<NodeId> hops;

  bool operator==(const LinkPath&) const = default;
};

enum class ResourceKind { cpu_benchmark, cores_available, ram_free, cpu_idle_fraction };

std::string_view to_string(ResourceKind kind);
std::optional<ResourceKind> parse_resource_kind(std::string_view text);

struct ResourceWeight {
  ResourceKind resource = ResourceKind::cpu_benchmark;
  double weight = 0.0;

  bool operator==(const ResourceWeight&) const = default;
};

struct ResourceWeights {
  std::vector<ResourceWeight> entries;

  // Equal unit weight on all four resource kinds.
  static ResourceWeights uniform();

  bool operator==(const ResourceWeights&) const = default;
};

// Timespans measured by one local trial, plus the size of one output object.
struct Calibration {
  Seconds t_upk_mdl = 0.0;  // unpack modules/dependencies
  Seconds t_upk_alg = 0.0;  // unpack main program
  Seconds t_pk_mdl = 0.0;   // pack modules/dependencies
  Seconds t_pk_alg = 0.0;   // pack main program
  Seconds t_pk_d = 0.0;     // pack one data object
  Seconds t_upk_d = 0.0;    // unpack one data object
  Seconds t_pk_o1 = 0.0;    // pack one output
  Seconds t_proc1 = 0.0;    // process one data object
  Seconds t_upk_o1 = 0.0;   // unpack one archived output
  Bytes out_bytes_per_object = 0;

  bool operator==(const Calibration&) const = default;
};

struct RequestSpec {
  Bytes byte_alg = 0;
  Bytes byte_mdl = 0;
  Bytes byte_desc = 0;
  Bytes byte_d = 0;  // size of one data object
  std::int64_t num_objects = 1;
  NodeId receiver;
  NodeId requester;

  bool operator==(const RequestSpec&) const = default;
};

// The seven getTime terms for one worker at one object count.
struct CostBreakdown {
  Seconds pack = 0.0;
  Seconds request_send = 0.0;
  Seconds unpack = 0.0;
  Seconds process = 0.0;
  Seconds output_pack = 0.0;
  Seconds output_send = 0.0;
  Seconds output_unpack = 0.0;
  Seconds total = 0.0;

  static CostBreakdown from_terms(Seconds pack, Seconds request_send, Seconds unpack,
                                  Seconds process, Seconds output_pack, Seconds output_send,
                                  Seconds output_unpack);
  Seconds sum_of_terms() const;

  bool operator==(const CostBreakdown&) const = default;
};

struct TraceStep {
  std::size_t step_index = 0;
  NodeId chosen;
  std::map<NodeId, Seconds> wt_before;

  bool operator==(const TraceStep&) const = default;
};

struct Plan {
  std::vector<NodeId> candidates;  // ascending node_id
  std::map<NodeId, std::int64_t> assignments;
  std::map<NodeId, Seconds> estimates;
  std::vector<TraceStep> trace;
  Seconds predicted_makespan = 0.0;
  std::set<NodeId> excluded;

  std::int64_t assigned_total() const;
  std::int64_t count_for(const NodeId& id) const;

  bool operator==(const Plan&) const = default;
};

struct Scenario {
  std::vector<NodeProfile> nodes;
  std::vector<DynamicContext> contexts;
  std::vector<LinkPath> links;
  RequestSpec request;
  Calibration calibration;
  ResourceWeights weights;
  NodeId delegator;

  const NodeProfile* find_node(const NodeId& id) const;
  const DynamicContext* find_context(const NodeId& id) const;
  // Direct lookup first, then the reverse direction (links are symmetric).
  const LinkPath* find_link(const NodeId& from, const NodeId& to) const;
  std::vector<NodeId> node_ids() const;

  bool operator==(const Scenario&) const = default;
};

// Builds a multi-hop path by summing the direct segments
// from -> hops[0] -> ... -> to. Returns nullopt when a segment is missing.
std::optional<LinkPath> compose_path(const Scenario& s, const NodeId& from,
                                     const std::vector<NodeId>& hops, const NodeId& to);

// Empty iff every invariant holds and every id reference resolves.
std::vector<std::string> validate_scenario(const Scenario& s);

}  // namespace rem
