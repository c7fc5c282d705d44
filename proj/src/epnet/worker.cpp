#include "rem/epnet/worker.hpp"

#include <sys/socket.h>

#include <iostream>

namespace rem::epnet {

namespace {

constexpr std::chrono::milliseconds kAcceptPoll{50};

double monotonic_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

}  // namespace

WorkerDaemon::WorkerDaemon(WorkerConfig config)
    : config_(std::move(config)), listener_(config_.bind), executor_(config_.executor) {
  if (config_.cores < 1) throw std::invalid_argument("worker needs at least one core");
}

WorkerDaemon::~WorkerDaemon() { stop(); }

void WorkerDaemon::start() {
  if (running_.exchange(true)) return;
  acceptor_ = std::thread([this] { accept_loop(); });
}

void WorkerDaemon::stop() {
  if (!running_.exchange(false)) return;
  if (acceptor_.joinable()) acceptor_.join();
  listener_.close();
  std::list<std::unique_ptr<Connection>> conns;
  {
    std::lock_guard lock(conn_mutex_);
    for (auto& c : connections_)
      if (!c->done && c->fd >= 0) ::shutdown(c->fd, SHUT_RDWR);
    conns.swap(connections_);
  }
  for (auto& c : conns)
    if (c->thread.joinable()) c->thread.join();
}

Sdm WorkerDaemon::sdm() const {
  Sdm s{config_.profile, config_.context, kToyExecutorTag};
  s.context.node_id = s.profile.node_id;
  s.context.sampled_at = monotonic_seconds();
  return s;
}

WorkerStats WorkerDaemon::stats() const {
  std::lock_guard lock(stats_mutex_);
  return stats_;
}

void WorkerDaemon::log(const std::string& line) const {
  if (config_.log_to_stderr) std::cerr << "[worker " << config_.profile.node_id << "] " << line << '\n';
}

void WorkerDaemon::reap_finished() {
  std::lock_guard lock(conn_mutex_);
  for (auto it = connections_.begin(); it != connections_.end();) {
    if ((*it)->done) {
      (*it)->thread.join();
      it = connections_.erase(it);
    } else {
      ++it;
    }
  }
}

void WorkerDaemon::accept_loop() {
  while (running_) {
    auto socket = listener_.accept(kAcceptPoll);
    reap_finished();
    if (!socket) continue;
    std::lock_guard lock(conn_mutex_);
    auto conn = std::make_unique<Connection>();
    Connection* raw = conn.get();
    raw->fd = socket->fd();
    raw->thread = std::thread([this, raw, s = std::move(*socket)]() mutable { serve(std::move(s), raw); });
    connections_.push_back(std::move(conn));
  }
}

void WorkerDaemon::serve(Socket socket, Connection* self) {
  try {
    while (running_) {
      std::optional<Frame> frame;
      try {
        frame = read_frame(socket);
      } catch (const FrameError& e) {
        // The stream position is unknown after a bad frame, so the
        // connection cannot be resynchronised.
        write_frame(socket, error_frame(std::string("bad frame: ") + e.what()));
        break;
      }
      if (!frame) break;
      switch (frame->type) {
        case FrameType::sdm_query:
          write_frame(socket, to_frame(sdm()));
          break;
        case FrameType::ep_deploy:
          handle_deploy(socket, *frame);
          break;
        default:
          write_frame(socket, error_frame(std::string("unexpected ") + to_string(frame->type)));
          break;
      }
    }
  } catch (const std::exception& e) {
    if (running_) log(std::string("connection dropped: ") + e.what());
  }
  std::lock_guard lock(conn_mutex_);
  socket.close();
  self->done = true;
}

void WorkerDaemon::acquire_core() {
  std::unique_lock lock(core_mutex_);
  core_cv_.wait(lock, [this] { return busy_cores_ < config_.cores; });
  ++busy_cores_;
}

void WorkerDaemon::release_core() {
  {
    std::lock_guard lock(core_mutex_);
    --busy_cores_;
  }
  core_cv_.notify_one();
}

void WorkerDaemon::handle_deploy(Socket& socket, const Frame& frame) {
  EpPackage package;
  try {
    package = package_from_frame(frame);
  } catch (const ProtocolError& e) {
    {
      std::lock_guard lock(stats_mutex_);
      ++stats_.deploys_rejected;
    }
    log(std::string("rejected package: ") + e.what());
    write_frame(socket, error_frame(e.what()));
    return;
  }
  const auto& meta = package.meta;
  {
    std::lock_guard lock(stats_mutex_);
    ++stats_.deploys_accepted;
  }
  write_frame(socket, to_frame(DeployAck{meta.package_id, config_.profile.node_id, meta.object_count}));

  OutputMessage out{meta.package_id, config_.profile.node_id, meta.object_indices, std::nullopt, {}};
  out.outputs.reserve(package.objects.size());
  acquire_core();
  try {
    StageTimings t;
    if (meta.instrument) {
      t.upk_mdl = timed_average([&] { stage_copy(package.mdl); });
      t.upk_alg = timed_average([&] { stage_copy(package.alg); });
    } else {
      stage_copy(package.mdl);
      stage_copy(package.alg);
    }
    using clock = std::chrono::steady_clock;
    clock::duration proc{};
    for (const auto& object : package.objects) {
      const Buffer input = stage_copy(object);
      const auto t0 = clock::now();
      const Buffer result = executor_.run(input);
      proc += clock::now() - t0;
      out.outputs.push_back(stage_copy(result));
    }
    if (meta.instrument && !package.objects.empty()) {
      const double n = static_cast<double>(package.objects.size());
      // Data and output copies are too short to time once; repeat them on
      // the first object instead of using the single-shot figures.
      t.upk_d = timed_average([&] { stage_copy(package.objects.front()); });
      t.proc1 = std::chrono::duration<double>(proc).count() / n;
      t.pk_o1 = timed_average([&] { stage_copy(out.outputs.front()); });
      out.timings = t;
    }
  } catch (...) {
    release_core();
    throw;
  }
  release_core();
  {
    std::lock_guard lock(stats_mutex_);
    stats_.objects_executed += static_cast<std::int64_t>(package.objects.size());
  }

  try {
    Socket to_receiver = Socket::connect(meta.receiver, config_.output_connect_timeout);
    write_frame(to_receiver, to_frame(out));
    to_receiver.shutdown();
    std::lock_guard lock(stats_mutex_);
    ++stats_.outputs_delivered;
  } catch (const NetError& e) {
    {
      std::lock_guard lock(stats_mutex_);
      ++stats_.output_failures;
    }
    const std::string reason = "receiver " + meta.receiver.to_string() + " unreachable: " + e.what();
    log(reason);
    try {
      write_frame(socket, error_frame(reason));
    } catch (const NetError&) {
      // deployer already hung up; the log line is all that remains
    }
  }
}

OutputReceiver::OutputReceiver(Endpoint bind) : listener_(bind) {}

OutputReceiver::~OutputReceiver() { stop(); }

void OutputReceiver::start() {
  if (running_.exchange(true)) return;
  acceptor_ = std::thread([this] { accept_loop(); });
}

void OutputReceiver::stop() {
  if (!running_.exchange(false)) return;
  if (acceptor_.joinable()) acceptor_.join();
  listener_.close();
  std::vector<std::thread> threads;
  {
    std::lock_guard lock(threads_mutex_);
    for (int fd : open_fds_) ::shutdown(fd, SHUT_RDWR);
    threads.swap(threads_);
  }
  for (auto& t : threads) t.join();
}

void OutputReceiver::accept_loop() {
  while (running_) {
    auto socket = listener_.accept(kAcceptPoll);
    if (!socket) continue;
    std::lock_guard lock(threads_mutex_);
    open_fds_.insert(socket->fd());
    threads_.emplace_back([this, s = std::move(*socket)]() mutable { serve(std::move(s)); });
  }
}

void OutputReceiver::serve(Socket socket) {
  const int fd = socket.fd();
  try {
    while (auto frame = read_frame(socket)) {
      const auto arrived = std::chrono::steady_clock::now();
      try {
        OutputMessage msg = output_from_frame(*frame);
        std::lock_guard lock(mutex_);
        objects_ += msg.outputs.size();
        received_.push_back({std::move(msg), arrived});
      } catch (const ProtocolError&) {
        std::lock_guard lock(mutex_);
        ++rejected_;
      }
      cv_.notify_all();
    }
  } catch (const std::exception&) {
    std::lock_guard lock(mutex_);
    ++rejected_;
  }
  std::lock_guard lock(threads_mutex_);
  open_fds_.erase(fd);
}

std::vector<ReceivedOutput> OutputReceiver::received() const {
  std::lock_guard lock(mutex_);
  return received_;
}

std::size_t OutputReceiver::object_count() const {
  std::lock_guard lock(mutex_);
  return objects_;
}

std::int64_t OutputReceiver::rejected_frames() const {
  std::lock_guard lock(mutex_);
  return rejected_;
}

bool OutputReceiver::wait_for_objects(std::size_t objects, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mutex_);
  return cv_.wait_for(lock, timeout, [&] { return objects_ >= objects; });
}

}  // namespace rem::epnet
