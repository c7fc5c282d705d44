#include <gtest/gtest.h>

#include <cstdlib>
#include <memory>
#include <random>
#include <thread>

#include "rem/epnet/deployer.hpp"
#include "rem/epnet/worker.hpp"
#include "support/random_scenario.hpp"

using namespace rem;
using namespace rem::epnet;
using namespace std::chrono_literals;

namespace {

std::unique_ptr<WorkerDaemon> start_worker(const NodeId& id, std::chrono::microseconds busy = 0us) {
  WorkerConfig c;
  c.profile.node_id = id;
  c.profile.cpu_benchmark = 1000;
  c.profile.cores_available = 1;
  c.profile.ram_total = 1 << 30;
  c.profile.disk_read = 1e8;
  c.profile.disk_write = 1e8;
  c.context.node_id = id;
  c.executor.busy_per_object = busy;
  c.log_to_stderr = false;
  auto w = std::make_unique<WorkerDaemon>(c);
  w->start();
  return w;
}

PackageSource make_source(std::size_t objects, std::size_t bytes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto blob = [&](std::size_t n) {
    Buffer b(n);
    for (auto& x : b) x = static_cast<std::uint8_t>(rng());
    return b;
  };
  PackageSource src;
  src.alg = blob(1203);
  src.mdl = blob(4096);
  for (std::size_t i = 0; i < objects; ++i) src.objects.push_back(blob(bytes));
  return src;
}

// Written out here rather than calling fnv1a64 so a bug there cannot hide.
Buffer expected_output(const Buffer& input) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : input) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  Buffer out{'E', 'P', 'O', '1'};
  for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(h >> shift));
  const auto n = static_cast<std::uint32_t>(input.size());
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(n >> shift));
  return out;
}

Plan plan_of(std::map<NodeId, std::int64_t> counts) {
  Plan p;
  p.assignments = std::move(counts);
  return p;
}

Scenario request_only() {
  Scenario s;
  s.request.requester = "T";
  s.request.receiver = "T";
  return s;
}

Endpoint dead_endpoint() {
  Listener l(Endpoint{});
  return l.endpoint();  // closed when `l` goes out of scope
}

template <class Pred>
bool eventually(Pred pred, std::chrono::milliseconds timeout = 5s) {
  const auto until = std::chrono::steady_clock::now() + timeout;
  while (std::chrono::steady_clock::now() < until) {
    if (pred()) return true;
    std::this_thread::sleep_for(5ms);
  }
  return pred();
}

}  // namespace

TEST(Epnet, MinimalDeployAcksThenDelivers) {
  auto w = start_worker("F", 5ms);
  OutputReceiver rx;
  rx.start();
  const PackageSource src = make_source(1, 100, 1);
  const DeliveryLog log = deploy(plan_of({{"F", 1}}), request_only(), src, {{"F", w->endpoint()}}, rx.endpoint());
  ASSERT_TRUE(log.all_ok()) << log.entries.front().error;
  ASSERT_TRUE(rx.wait_for_objects(1, 5s));
  const auto got = rx.received();
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].message.package_id, "ep-F");
  EXPECT_EQ(got[0].message.worker_id, "F");
  EXPECT_EQ(got[0].message.outputs.front(), expected_output(src.objects[0]));
  EXPECT_LT(log.entries[0].ack_at, got[0].arrived);
  EXPECT_EQ(w->stats().deploys_accepted, 1);
}

TEST(Epnet, CountMismatchIsRejectedWithoutExecution) {
  auto w = start_worker("F");
  EpPackage p;
  p.meta.package_id = "bad";
  p.meta.object_count = 3;
  p.meta.object_indices = {0, 1, 2};
  p.objects = {{1}, {2}};
  Frame f = to_frame(p);
  Socket s = Socket::connect(w->endpoint(), 2s);
  write_frame(s, f);
  s.set_receive_timeout(5s);
  const auto reply = read_frame(s);
  ASSERT_TRUE(reply);
  EXPECT_EQ(reply->type, FrameType::error);
  EXPECT_FALSE(error_reason(*reply).empty());
  EXPECT_EQ(w->stats().deploys_rejected, 1);
  EXPECT_EQ(w->stats().objects_executed, 0);
}

TEST(Epnet, UnexpectedFrameGetsError) {
  auto w = start_worker("F");
  Socket s = Socket::connect(w->endpoint(), 2s);
  write_frame(s, to_frame(DeployAck{"x", "y", 1}));
  s.set_receive_timeout(5s);
  const auto reply = read_frame(s);
  ASSERT_TRUE(reply);
  EXPECT_EQ(reply->type, FrameType::error);
}

TEST(Epnet, TenObjectsChecksumsMatch) {
  auto w = start_worker("M", 5ms);
  OutputReceiver rx;
  rx.start();
  const PackageSource src = make_source(10, 3000, 2);
  const DeliveryLog log = deploy(plan_of({{"M", 10}}), request_only(), src, {{"M", w->endpoint()}}, rx.endpoint());
  ASSERT_TRUE(log.all_ok());
  ASSERT_TRUE(rx.wait_for_objects(10, 10s));
  const auto received = rx.received();
  const auto& msg = received.front().message;
  ASSERT_EQ(msg.outputs.size(), 10u);
  for (std::size_t i = 0; i < 10; ++i) {
    const auto idx = static_cast<std::size_t>(msg.object_indices[i]);
    EXPECT_EQ(msg.outputs[i], expected_output(src.objects[idx]));
  }
  EXPECT_EQ(w->stats().objects_executed, 10);
}

TEST(Epnet, TwoWorkersConserveObjects) {
  auto a = start_worker("E", 1ms);
  auto b = start_worker("F", 1ms);
  OutputReceiver rx;
  rx.start();
  const PackageSource src = make_source(7, 500, 3);
  const Plan plan = plan_of({{"E", 3}, {"F", 4}});
  const DeliveryLog log =
      deploy(plan, request_only(), src, {{"E", a->endpoint()}, {"F", b->endpoint()}}, rx.endpoint());
  ASSERT_TRUE(log.all_ok());
  ASSERT_TRUE(rx.wait_for_objects(7, 10s));
  std::set<std::int64_t> seen;
  for (const auto& r : rx.received())
    for (std::size_t i = 0; i < r.message.outputs.size(); ++i) {
      const auto idx = r.message.object_indices[i];
      EXPECT_TRUE(seen.insert(idx).second) << "object " << idx << " returned twice";
      EXPECT_EQ(r.message.outputs[i], expected_output(src.objects[static_cast<std::size_t>(idx)]));
    }
  EXPECT_EQ(seen.size(), 7u);
  EXPECT_EQ(log.find("E")->object_indices, (std::vector<std::int64_t>{0, 1, 2}));
  EXPECT_EQ(log.find("F")->object_indices, (std::vector<std::int64_t>{3, 4, 5, 6}));
}

TEST(Epnet, DeadWorkerFailsAloneAndOthersFinish) {
  auto a = start_worker("E");
  auto b = start_worker("F");
  const Endpoint b_addr = b->endpoint();
  b->stop();
  b.reset();
  OutputReceiver rx;
  rx.start();
  const PackageSource src = make_source(4, 100, 4);
  const DeliveryLog log = deploy(plan_of({{"E", 2}, {"F", 2}}), request_only(), src,
                                 {{"E", a->endpoint()}, {"F", b_addr}}, rx.endpoint());
  EXPECT_FALSE(log.all_ok());
  EXPECT_TRUE(log.find("E")->ok);
  EXPECT_FALSE(log.find("F")->ok);
  EXPECT_FALSE(log.find("F")->error.empty());
  EXPECT_LT(log.offset(log.find("F")->ack_at), 0.0);
  EXPECT_TRUE(rx.wait_for_objects(2, 5s));
}

TEST(Epnet, PlanAndSourceMustAgree) {
  const PackageSource src = make_source(2, 10, 5);
  EXPECT_THROW(deploy(plan_of({{"E", 3}}), request_only(), src, {{"E", Endpoint{}}}, Endpoint{}),
               std::invalid_argument);
  EXPECT_THROW(deploy(plan_of({{"E", 2}}), request_only(), src, {}, Endpoint{}), std::invalid_argument);
}

TEST(Epnet, SdmQueryDescribesWorker) {
  auto w = start_worker("M");
  const Sdm sdm = query_sdm(w->endpoint());
  EXPECT_EQ(sdm.profile.node_id, "M");
  EXPECT_EQ(sdm.profile.cpu_benchmark, 1000);
  EXPECT_EQ(sdm.executor_tag, kToyExecutorTag);
  EXPECT_THROW(query_sdm(dead_endpoint(), 500ms), NetError);
}

TEST(Epnet, AckTimeoutFromEnvironment) {
  ::setenv("EPNET_ACK_TIMEOUT_MS", "1500", 1);
  EXPECT_EQ(default_ack_timeout(), 1500ms);
  ::setenv("EPNET_ACK_TIMEOUT_MS", "soon", 1);
  EXPECT_EQ(default_ack_timeout(), 10s);
  ::unsetenv("EPNET_ACK_TIMEOUT_MS");
  EXPECT_EQ(default_ack_timeout(), 10s);
}

TEST(Epnet, SilentWorkerTimesOut) {
  Listener silent(Endpoint{});
  std::thread holder([&] {
    auto s = silent.accept(3s);
    std::this_thread::sleep_for(600ms);
  });
  DeployOptions o;
  o.ack_timeout = 200ms;
  const DeliveryLog log = deploy(plan_of({{"E", 1}}), request_only(), make_source(1, 10, 6),
                                 {{"E", silent.endpoint()}}, Endpoint{}, o);
  holder.join();
  EXPECT_FALSE(log.all_ok());
  EXPECT_EQ(log.entries[0].error, "no acknowledgement within 200 ms");
}

TEST(Epnet, CalibrationIsPositive) {
  auto w = start_worker("local", 2ms);
  const Calibration c = calibrate_local(w->endpoint(), make_source(1, 100'000, 7));
  for (double v : {c.t_upk_mdl, c.t_upk_alg, c.t_pk_mdl, c.t_pk_alg, c.t_pk_d, c.t_upk_d, c.t_pk_o1, c.t_proc1,
                   c.t_upk_o1})
    EXPECT_GT(v, 0.0);
  EXPECT_EQ(c.out_bytes_per_object, kToyOutputBytes);
  EXPECT_GT(c.t_proc1, 1.5e-3);
}

TEST(Epnet, CalibrationTrialsAgreeAndTrackBusyWork) {
  auto w1 = start_worker("local", 10ms);
  auto w2 = start_worker("local", 20ms);
  const PackageSource src = make_source(1, 10'000, 8);
  const Calibration a = calibrate_local(w1->endpoint(), src);
  const Calibration b = calibrate_local(w1->endpoint(), src);
  EXPECT_NEAR(a.t_proc1, b.t_proc1, 0.25 * a.t_proc1);
  const Calibration doubled = calibrate_local(w2->endpoint(), src);
  EXPECT_NEAR(doubled.t_proc1 / a.t_proc1, 2.0, 0.5);

  Calibration far = a;
  far.t_proc1 *= 4;
  far.out_bytes_per_object += 1;
  const auto warnings = compare_calibrations(a, far);
  ASSERT_EQ(warnings.size(), 2u);
  EXPECT_EQ(warnings[0].rfind("t_proc1", 0), 0u);
  EXPECT_TRUE(compare_calibrations(a, a).empty());
}

TEST(Epnet, SequentialAndConcurrentLogsMatch) {
  auto a = start_worker("E");
  auto b = start_worker("F");
  auto c = start_worker("M");
  OutputReceiver rx;
  rx.start();
  const std::map<NodeId, Endpoint> addr{{"E", a->endpoint()}, {"F", b->endpoint()}, {"M", c->endpoint()}};
  const Plan plan = plan_of({{"E", 2}, {"F", 0}, {"M", 3}});
  const PackageSource src = make_source(5, 200, 9);
  DeployOptions seq;
  seq.concurrent = false;
  const DeliveryLog x = deploy(plan, request_only(), src, addr, rx.endpoint(), seq);
  const DeliveryLog y = deploy(plan, request_only(), src, addr, rx.endpoint());
  ASSERT_EQ(x.entries.size(), 2u);
  ASSERT_EQ(x.entries.size(), y.entries.size());
  for (std::size_t i = 0; i < x.entries.size(); ++i) {
    EXPECT_EQ(x.entries[i].node_id, y.entries[i].node_id);
    EXPECT_EQ(x.entries[i].address, y.entries[i].address);
    EXPECT_EQ(x.entries[i].package_id, y.entries[i].package_id);
    EXPECT_EQ(x.entries[i].object_indices, y.entries[i].object_indices);
    EXPECT_EQ(x.entries[i].ok, y.entries[i].ok);
  }
  EXPECT_TRUE(rx.wait_for_objects(10, 5s));
  // Sequential sends never overlap.
  EXPECT_LE(x.entries[0].ack_at, x.entries[1].pack_start);
}

TEST(Epnet, UnreachableReceiverIsCountedAsOutputFailure) {
  auto w = start_worker("F");
  const DeliveryLog log = deploy(plan_of({{"F", 1}}), request_only(), make_source(1, 10, 10),
                                 {{"F", w->endpoint()}}, dead_endpoint());
  EXPECT_TRUE(log.all_ok());
  EXPECT_TRUE(eventually([&] { return w->stats().output_failures == 1; }));
  EXPECT_EQ(w->stats().outputs_delivered, 0);
}

TEST(Epnet, StopIsIdempotent) {
  auto w = start_worker("F");
  w->stop();
  w->stop();
  EXPECT_FALSE(w->running());
  EXPECT_THROW(Socket::connect(w->endpoint(), 300ms), NetError);
}
