#include "rem/epnet/messages.hpp"

#include <nlohmann/json.hpp>

namespace rem::epnet {

using nlohmann::json;

namespace {

json parse_header(const Frame& frame, FrameType expected) {
  if (frame.type != expected) {
    throw ProtocolError(std::string("expected ") + to_string(expected) + ", got " + to_string(frame.type));
  }
  try {
    return json::parse(frame.header);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string(to_string(expected)) + " header is not valid JSON: " + e.what());
  }
}

template <typename T>
T get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("header field '") + key + "': " + e.what());
  }
}

}  // namespace

Frame sdm_query_frame() { return Frame{FrameType::sdm_query, {}, {}}; }

Frame to_frame(const Sdm& sdm) {
  const auto& p = sdm.profile;
  const auto& c = sdm.context;
  json h{{"node_id", p.node_id},
         {"kind", std::string(to_string(p.kind))},
         {"cpu_benchmark", p.cpu_benchmark},
         {"cores_available", p.cores_available},
         {"ram_total", p.ram_total},
         {"disk_read", p.disk_read},
         {"disk_write", p.disk_write},
         {"cpu_usage", c.cpu_usage},
         {"ram_used", c.ram_used},
         {"sampled_at", c.sampled_at},
         {"executor", sdm.executor_tag}};
  return Frame{FrameType::sdm_response, h.dump(), {}};
}

Sdm sdm_from_frame(const Frame& frame) {
  const json h = parse_header(frame, FrameType::sdm_response);
  Sdm sdm;
  auto& p = sdm.profile;
  p.node_id = get<std::string>(h, "node_id");
  const auto kind = parse_node_kind(get<std::string>(h, "kind"));
  if (!kind) throw ProtocolError("SDM names an unknown node kind");
  p.kind = *kind;
  p.cpu_benchmark = get<double>(h, "cpu_benchmark");
  p.cores_available = get<int>(h, "cores_available");
  p.ram_total = get<Bytes>(h, "ram_total");
  p.disk_read = get<double>(h, "disk_read");
  p.disk_write = get<double>(h, "disk_write");
  sdm.context.node_id = p.node_id;
  sdm.context.cpu_usage = get<double>(h, "cpu_usage");
  sdm.context.ram_used = get<Bytes>(h, "ram_used");
  sdm.context.sampled_at = get<double>(h, "sampled_at");
  sdm.executor_tag = get<std::string>(h, "executor");
  return sdm;
}

Frame to_frame(const EpPackage& package) {
  const auto& m = package.meta;
  json h{{"package_id", m.package_id},
         {"entry_point", m.entry_point},
         {"requester", m.requester},
         {"receiver_id", m.receiver_id},
         {"receiver", m.receiver.to_string()},
         {"object_count", m.object_count},
         {"object_indices", m.object_indices},
         {"instrument", m.instrument}};
  Frame f{FrameType::ep_deploy, h.dump(), {}};
  f.sections.reserve(2 + package.objects.size());
  f.sections.push_back(package.alg);
  f.sections.push_back(package.mdl);
  for (const auto& o : package.objects) f.sections.push_back(o);
  return f;
}

EpPackage package_from_frame(const Frame& frame) {
  const json h = parse_header(frame, FrameType::ep_deploy);
  EpPackage p;
  auto& m = p.meta;
  m.package_id = get<std::string>(h, "package_id");
  m.entry_point = get<std::string>(h, "entry_point");
  m.requester = get<std::string>(h, "requester");
  m.receiver_id = get<std::string>(h, "receiver_id");
  try {
    m.receiver = Endpoint::parse(get<std::string>(h, "receiver"));
  } catch (const std::invalid_argument& e) {
    throw ProtocolError(std::string("bad receiver address: ") + e.what());
  }
  m.object_count = get<std::int64_t>(h, "object_count");
  m.object_indices = get<std::vector<std::int64_t>>(h, "object_indices");
  m.instrument = h.contains("instrument") && get<bool>(h, "instrument");

  if (frame.sections.size() < 2) throw ProtocolError("package lacks algorithm and module sections");
  const auto data_sections = static_cast<std::int64_t>(frame.sections.size() - 2);
  if (m.object_count != data_sections) {
    throw ProtocolError("package declares " + std::to_string(m.object_count) + " objects but carries " +
                        std::to_string(data_sections) + " data sections");
  }
  if (static_cast<std::int64_t>(m.object_indices.size()) != m.object_count)
    throw ProtocolError("object_indices does not match object_count");
  p.alg = frame.sections[0];
  p.mdl = frame.sections[1];
  p.objects.assign(frame.sections.begin() + 2, frame.sections.end());
  return p;
}

Frame to_frame(const DeployAck& ack) {
  json h{{"package_id", ack.package_id}, {"worker_id", ack.worker_id}, {"object_count", ack.object_count}};
  return Frame{FrameType::ep_ack, h.dump(), {}};
}

DeployAck ack_from_frame(const Frame& frame) {
  const json h = parse_header(frame, FrameType::ep_ack);
  return DeployAck{get<std::string>(h, "package_id"), get<std::string>(h, "worker_id"),
                   get<std::int64_t>(h, "object_count")};
}

Frame to_frame(const OutputMessage& out) {
  json h{{"package_id", out.package_id},
         {"worker_id", out.worker_id},
         {"object_indices", out.object_indices}};
  if (out.timings) {
    const auto& t = *out.timings;
    h["timings"] = {{"upk_mdl", t.upk_mdl}, {"upk_alg", t.upk_alg}, {"upk_d", t.upk_d},
                    {"proc1", t.proc1},     {"pk_o1", t.pk_o1}};
  }
  return Frame{FrameType::ep_output, h.dump(), out.outputs};
}

OutputMessage output_from_frame(const Frame& frame) {
  const json h = parse_header(frame, FrameType::ep_output);
  OutputMessage out;
  out.package_id = get<std::string>(h, "package_id");
  out.worker_id = get<std::string>(h, "worker_id");
  out.object_indices = get<std::vector<std::int64_t>>(h, "object_indices");
  if (h.contains("timings")) {
    const auto& t = h.at("timings");
    out.timings = StageTimings{get<double>(t, "upk_mdl"), get<double>(t, "upk_alg"),
                               get<double>(t, "upk_d"), get<double>(t, "proc1"),
                               get<double>(t, "pk_o1")};
  }
  out.outputs = frame.sections;
  if (out.outputs.size() != out.object_indices.size())
    throw ProtocolError("EP_OUTPUT section count does not match object_indices");
  return out;
}

Frame error_frame(const std::string& reason) {
  return Frame{FrameType::error, json{{"reason", reason}}.dump(), {}};
}

std::string error_reason(const Frame& frame) {
  const json h = parse_header(frame, FrameType::error);
  return get<std::string>(h, "reason");
}

}  // namespace rem::epnet
