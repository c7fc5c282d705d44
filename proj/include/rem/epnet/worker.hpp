#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "rem/epnet/executor.hpp"
#include "rem/epnet/messages.hpp"
#include "rem/epnet/socket.hpp"

namespace rem::epnet {

inline constexpr const char* kToyExecutorTag = "toy-v1";

struct WorkerConfig {
  Endpoint bind;  // port 0 picks a free port
  NodeProfile profile;
  DynamicContext context;
  int cores = 1;  // packages executed in parallel
  ExecutorConfig executor;
  std::chrono::milliseconds output_connect_timeout{5000};
  bool log_to_stderr = true;
};

struct WorkerStats {
  std::int64_t deploys_accepted = 0;
  std::int64_t deploys_rejected = 0;
  std::int64_t objects_executed = 0;
  std::int64_t outputs_delivered = 0;
  std::int64_t output_failures = 0;
};

// Worker daemon. Serves every connection on its own thread; at most
// `cores` packages execute at once.
class WorkerDaemon {
 public:
  explicit WorkerDaemon(WorkerConfig config);  // binds immediately
  ~WorkerDaemon();
  WorkerDaemon(const WorkerDaemon&) = delete;
  WorkerDaemon& operator=(const WorkerDaemon&) = delete;

  void start();
  void stop();  // idempotent; joins every thread
  bool running() const { return running_; }

  Endpoint endpoint() const { return listener_.endpoint(); }
  Sdm sdm() const;
  WorkerStats stats() const;

 private:
  struct Connection {
    std::thread thread;
    std::atomic<bool> done{false};
    int fd = -1;
  };

  void accept_loop();
  void serve(Socket socket, Connection* self);
  void handle_deploy(Socket& socket, const Frame& frame);
  void log(const std::string& line) const;
  void reap_finished();

  void acquire_core();
  void release_core();

  WorkerConfig config_;
  Listener listener_;
  ToyExecutor executor_;
  std::atomic<bool> running_{false};
  std::thread acceptor_;

  std::mutex conn_mutex_;
  std::list<std::unique_ptr<Connection>> connections_;

  std::mutex core_mutex_;
  std::condition_variable core_cv_;
  int busy_cores_ = 0;

  mutable std::mutex stats_mutex_;
  WorkerStats stats_;
};

struct ReceivedOutput {
  OutputMessage message;
  std::chrono::steady_clock::time_point arrived;
};

// Collects EP_OUTPUT frames sent by workers.
class OutputReceiver {
 public:
  explicit OutputReceiver(Endpoint bind = {});
  ~OutputReceiver();
  OutputReceiver(const OutputReceiver&) = delete;
  OutputReceiver& operator=(const OutputReceiver&) = delete;

  void start();
  void stop();

  Endpoint endpoint() const { return listener_.endpoint(); }
  std::vector<ReceivedOutput> received() const;
  std::size_t object_count() const;
  std::int64_t rejected_frames() const;

  // True once at least `objects` output sections have arrived.
  bool wait_for_objects(std::size_t objects, std::chrono::milliseconds timeout) const;

 private:
  void accept_loop();
  void serve(Socket socket);

  Listener listener_;
  std::atomic<bool> running_{false};
  std::thread acceptor_;
  std::mutex threads_mutex_;
  std::vector<std::thread> threads_;
  std::set<int> open_fds_;

  mutable std::mutex mutex_;
  mutable std::condition_variable cv_;
  std::vector<ReceivedOutput> received_;
  std::size_t objects_ = 0;
  std::int64_t rejected_ = 0;
};

}  // namespace rem::epnet
