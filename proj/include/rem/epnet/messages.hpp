#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rem/epnet/frame.hpp"
#include "rem/epnet/socket.hpp"
#include "rem/model.hpp"

namespace rem::epnet {

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Service description a worker advertises.
struct Sdm {
  NodeProfile profile;
  DynamicContext context;
  std::string executor_tag;

  bool operator==(const Sdm&) const = default;
};

Frame sdm_query_frame();
Frame to_frame(const Sdm& sdm);
Sdm sdm_from_frame(const Frame& frame);

// Description metadata carried in an EP_DEPLOY header.
struct PackageMeta {
  std::string package_id;
  std::string entry_point = "main";
  NodeId requester;
  NodeId receiver_id;
  Endpoint receiver;
  std::int64_t object_count = 0;
  std::vector<std::int64_t> object_indices;  // positions in the original request
  bool instrument = false;  // report per-stage timings with the output

  bool operator==(const PackageMeta&) const = default;
};

// Sections on the wire: alg, mdl, then one per data object.
struct EpPackage {
  PackageMeta meta;
  Buffer alg;
  Buffer mdl;
  std::vector<Buffer> objects;

  bool operator==(const EpPackage&) const = default;
};

Frame to_frame(const EpPackage& package);
// Throws ProtocolError when the header is malformed or the declared object
// count does not match the data sections.
EpPackage package_from_frame(const Frame& frame);

struct DeployAck {
  std::string package_id;
  NodeId worker_id;
  std::int64_t object_count = 0;
};

Frame to_frame(const DeployAck& ack);
DeployAck ack_from_frame(const Frame& frame);

// Worker-side stage durations; the data, process and output figures are per
// object.
struct StageTimings {
  double upk_mdl = 0.0;
  double upk_alg = 0.0;
  double upk_d = 0.0;
  double proc1 = 0.0;
  double pk_o1 = 0.0;
};

struct OutputMessage {
  std::string package_id;
  NodeId worker_id;
  std::vector<std::int64_t> object_indices;
  std::optional<StageTimings> timings;
  std::vector<Buffer> outputs;
};

Frame to_frame(const OutputMessage& out);
OutputMessage output_from_frame(const Frame& frame);

Frame error_frame(const std::string& reason);
std::string error_reason(const Frame& frame);

}  // namespace rem::epnet
