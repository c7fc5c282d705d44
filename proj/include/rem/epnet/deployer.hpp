#pragma once

#include <chrono>
#include <map>
#include <string>
#include <vector>

#include "rem/epnet/messages.hpp"
#include "rem/epnet/socket.hpp"
#include "rem/model.hpp"

namespace rem::epnet {

// The request's files: program, modules and the data objects in request order.
struct PackageSource {
  Buffer alg;
  Buffer mdl;
  std::vector<Buffer> objects;
  std::string entry_point = "main";
};

// 10 s unless EPNET_ACK_TIMEOUT_MS holds a positive integer.
std::chrono::milliseconds default_ack_timeout();

struct DeployOptions {
  std::chrono::milliseconds ack_timeout = default_ack_timeout();
  std::chrono::milliseconds connect_timeout{2000};
  bool concurrent = true;
  bool instrument = false;
  std::string package_prefix = "ep";
};

using Clock = std::chrono::steady_clock;

struct DeliveryEntry {
  NodeId node_id;
  Endpoint address;
  std::string package_id;
  std::vector<std::int64_t> object_indices;
  Clock::time_point pack_start{};
  Clock::time_point pack_end{};
  Clock::time_point send_end{};
  Clock::time_point ack_at{};
  bool ok = false;
  std::string error;
};

struct DeliveryLog {
  Clock::time_point started{};
  std::vector<DeliveryEntry> entries;  // ascending node_id

  bool all_ok() const;
  const DeliveryEntry* find(const NodeId& id) const;
  // Seconds from `started`; negative when the stage never happened.
  double offset(Clock::time_point t) const;
};

// Sends one package per worker with wp > 0. Objects are handed out as
// contiguous blocks in ascending node_id order. A worker that refuses the
// connection, answers with ERROR or misses the ACK deadline is marked failed
// without affecting the others.
//
// Throws std::invalid_argument when the object count does not match the plan
// or a worker has no address.
DeliveryLog deploy(const Plan& plan, const Scenario& s, const PackageSource& source,
                   const std::map<NodeId, Endpoint>& workers, const Endpoint& receiver,
                   const DeployOptions& options = {});

// The object indices each worker receives under `plan`.
std::map<NodeId, std::vector<std::int64_t>> object_blocks(const Plan& plan);

Sdm query_sdm(const Endpoint& worker, std::chrono::milliseconds timeout = std::chrono::seconds(5));

struct CalibrationOptions {
  std::chrono::milliseconds timeout{30000};
  Endpoint receiver_bind;  // where the trial's output comes back
};

// Runs a one-object trial against a running local worker. Master-side pack
// stages and the output unpack are timed here, the rest is reported by the
// worker. Every figure is clamped to at least 1 ns.
Calibration calibrate_local(const Endpoint& worker, const PackageSource& sample,
                            const CalibrationOptions& options = {});

// One message per timing that differs by more than `bound` relative to the
// larger of the two values.
std::vector<std::string> compare_calibrations(const Calibration& a, const Calibration& b,
                                              double bound = 0.5);

}  // namespace rem::epnet
