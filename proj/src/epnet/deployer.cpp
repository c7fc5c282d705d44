#include "rem/epnet/deployer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "rem/epnet/executor.hpp"
#include "rem/epnet/worker.hpp"

namespace rem::epnet {

std::chrono::milliseconds default_ack_timeout() {
  if (const char* env = std::getenv("EPNET_ACK_TIMEOUT_MS")) {
    char* end = nullptr;
    const long long ms = std::strtoll(env, &end, 10);
    if (end != env && *end == '\0' && ms > 0) return std::chrono::milliseconds(ms);
  }
  return std::chrono::seconds(10);
}

bool DeliveryLog::all_ok() const {
  return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.ok; });
}

const DeliveryEntry* DeliveryLog::find(const NodeId& id) const {
  for (const auto& e : entries)
    if (e.node_id == id) return &e;
  return nullptr;
}

double DeliveryLog::offset(Clock::time_point t) const {
  if (t == Clock::time_point{}) return -1.0;
  return std::chrono::duration<double>(t - started).count();
}

std::map<NodeId, std::vector<std::int64_t>> object_blocks(const Plan& plan) {
  std::map<NodeId, std::vector<std::int64_t>> blocks;
  std::int64_t next = 0;
  for (const auto& [id, wp] : plan.assignments) {
    if (wp <= 0) continue;
    auto& b = blocks[id];
    for (std::int64_t k = 0; k < wp; ++k) b.push_back(next++);
  }
  return blocks;
}

namespace {

void deliver(DeliveryEntry& entry, const Scenario& s, const PackageSource& source,
             const Endpoint& receiver, const DeployOptions& options) {
  try {
    entry.pack_start = Clock::now();
    EpPackage package;
    package.meta.package_id = entry.package_id;
    package.meta.entry_point = source.entry_point;
    package.meta.requester = s.request.requester;
    package.meta.receiver_id = s.request.receiver;
    package.meta.receiver = receiver;
    package.meta.object_count = static_cast<std::int64_t>(entry.object_indices.size());
    package.meta.object_indices = entry.object_indices;
    package.meta.instrument = options.instrument;
    package.alg = stage_copy(source.alg);
    package.mdl = stage_copy(source.mdl);
    for (std::int64_t i : entry.object_indices)
      package.objects.push_back(stage_copy(source.objects[static_cast<std::size_t>(i)]));
    const Buffer wire = encode_frame(to_frame(package));
    entry.pack_end = Clock::now();

    Socket socket = Socket::connect(entry.address, options.connect_timeout);
    socket.send_all(wire);
    entry.send_end = Clock::now();

    socket.set_receive_timeout(options.ack_timeout);
    const auto reply = read_frame(socket);
    if (!reply) throw NetError("worker closed the connection before acknowledging");
    if (reply->type == FrameType::error) throw NetError("worker rejected package: " + error_reason(*reply));
    const DeployAck ack = ack_from_frame(*reply);
    if (ack.package_id != entry.package_id)
      throw ProtocolError("acknowledgement names package '" + ack.package_id + "'");
    entry.ack_at = Clock::now();
    entry.ok = true;
  } catch (const TimeoutError&) {
    entry.error = "no acknowledgement within " + std::to_string(options.ack_timeout.count()) + " ms";
  } catch (const std::exception& e) {
    entry.error = e.what();
  }
}

}  // namespace

DeliveryLog deploy(const Plan& plan, const Scenario& s, const PackageSource& source,
                   const std::map<NodeId, Endpoint>& workers, const Endpoint& receiver,
                   const DeployOptions& options) {
  if (static_cast<std::int64_t>(source.objects.size()) != plan.assigned_total()) {
    throw std::invalid_argument("plan assigns " + std::to_string(plan.assigned_total()) +
                                " objects but the package source holds " +
                                std::to_string(source.objects.size()));
  }
  DeliveryLog log;
  for (auto& [id, indices] : object_blocks(plan)) {
    const auto it = workers.find(id);
    if (it == workers.end()) throw std::invalid_argument("no daemon address for worker '" + id + "'");
    DeliveryEntry e;
    e.node_id = id;
    e.address = it->second;
    e.package_id = options.package_prefix + "-" + id;
    e.object_indices = std::move(indices);
    log.entries.push_back(std::move(e));
  }

  log.started = Clock::now();
  if (options.concurrent && log.entries.size() > 1) {
    std::vector<std::thread> threads;
    threads.reserve(log.entries.size());
    for (auto& e : log.entries)
      threads.emplace_back([&e, &s, &source, &receiver, &options] { deliver(e, s, source, receiver, options); });
    for (auto& t : threads) t.join();
  } else {
    for (auto& e : log.entries) deliver(e, s, source, receiver, options);
  }
  return log;
}

Sdm query_sdm(const Endpoint& worker, std::chrono::milliseconds timeout) {
  Socket socket = Socket::connect(worker, timeout);
  write_frame(socket, sdm_query_frame());
  socket.set_receive_timeout(timeout);
  const auto reply = read_frame(socket);
  if (!reply) throw NetError("worker closed the connection without an SDM");
  if (reply->type == FrameType::error) throw ProtocolError("worker answered ERROR: " + error_reason(*reply));
  return sdm_from_frame(*reply);
}

Calibration calibrate_local(const Endpoint& worker, const PackageSource& sample,
                            const CalibrationOptions& options) {
  if (sample.objects.empty()) throw std::invalid_argument("calibration sample needs one data object");

  Calibration c;
  c.t_pk_mdl = timed_average([&] { stage_copy(sample.mdl); });
  c.t_pk_alg = timed_average([&] { stage_copy(sample.alg); });
  c.t_pk_d = timed_average([&] { stage_copy(sample.objects.front()); });

  OutputReceiver receiver(options.receiver_bind);
  receiver.start();

  Plan plan;
  plan.assignments["local"] = 1;
  Scenario s;
  s.request.requester = "local";
  s.request.receiver = "local";
  PackageSource one{sample.alg, sample.mdl, {sample.objects.front()}, sample.entry_point};
  DeployOptions deploy_options;
  deploy_options.ack_timeout = options.timeout;
  deploy_options.instrument = true;
  deploy_options.package_prefix = "calibration";
  const DeliveryLog log = deploy(plan, s, one, {{"local", worker}}, receiver.endpoint(), deploy_options);
  if (!log.all_ok()) throw NetError("calibration deploy failed: " + log.entries.front().error);
  if (!receiver.wait_for_objects(1, options.timeout)) throw TimeoutError("calibration output did not arrive");

  const auto received = receiver.received();
  receiver.stop();
  const OutputMessage& out = received.front().message;
  if (!out.timings || out.outputs.size() != 1) throw ProtocolError("worker sent no stage timings");
  const StageTimings& t = *out.timings;
  c.t_upk_mdl = t.upk_mdl;
  c.t_upk_alg = t.upk_alg;
  c.t_upk_d = t.upk_d;
  c.t_proc1 = t.proc1;
  c.t_pk_o1 = t.pk_o1;
  c.t_upk_o1 = timed_average([&] { stage_copy(out.outputs.front()); });
  c.out_bytes_per_object = out.outputs.front().size();

  constexpr double kFloor = 1e-9;
  for (double* v : {&c.t_upk_mdl, &c.t_upk_alg, &c.t_pk_mdl, &c.t_pk_alg, &c.t_pk_d, &c.t_upk_d,
                    &c.t_pk_o1, &c.t_proc1, &c.t_upk_o1})
    *v = std::max(*v, kFloor);
  return c;
}

std::vector<std::string> compare_calibrations(const Calibration& a, const Calibration& b, double bound) {
  const std::pair<const char*, double Calibration::*> fields[] = {
      {"t_upk_mdl", &Calibration::t_upk_mdl}, {"t_upk_alg", &Calibration::t_upk_alg},
      {"t_pk_mdl", &Calibration::t_pk_mdl},   {"t_pk_alg", &Calibration::t_pk_alg},
      {"t_pk_d", &Calibration::t_pk_d},       {"t_upk_d", &Calibration::t_upk_d},
      {"t_pk_o1", &Calibration::t_pk_o1},     {"t_proc1", &Calibration::t_proc1},
      {"t_upk_o1", &Calibration::t_upk_o1}};
  std::vector<std::string> warnings;
  for (const auto& [name, field] : fields) {
    const double x = a.*field;
    const double y = b.*field;
    const double hi = std::max(x, y);
    if (hi <= 0.0) continue;
    const double rel = std::abs(x - y) / hi;
    if (rel > bound) {
      warnings.push_back(std::string(name) + " differs by " + std::to_string(static_cast<int>(rel * 100)) +
                         "% between trials (" + std::to_string(x) + " s vs " + std::to_string(y) + " s)");
    }
  }
  if (a.out_bytes_per_object != b.out_bytes_per_object) warnings.push_back("out_bytes_per_object differs between trials");
  return warnings;
}

}  // namespace rem::epnet
