#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <mutex>
#include <random>
#include <span>

#include "rem/epnet/frame.hpp"

namespace rem::epnet {

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);

inline constexpr std::size_t kToyOutputBytes = 16;

// Deterministic stand-in for a user program. For an input of n bytes the
// output is 16 bytes: the tag "EPO1", FNV-1a-64 of the input, and n as u32,
// both big-endian.
Buffer toy_transform(std::span<const std::uint8_t> input);

// Spins (not sleeps) so the time shows up as CPU work.
void busy_wait(std::chrono::nanoseconds duration);

// Archive-style copy used for every pack/unpack stage: copies the bytes and
// folds them into a checksum.
Buffer stage_copy(std::span<const std::uint8_t> bytes);

// Mean wall time of `stage`, repeated until at least `min_total` has elapsed
// (or `max_reps` runs) so that sub-microsecond stages still get a usable figure.
double timed_average(const std::function<void()>& stage,
                     std::chrono::nanoseconds min_total = std::chrono::milliseconds(2),
                     int max_reps = 10000);

struct ExecutorConfig {
  std::chrono::microseconds busy_per_object{0};
  double jitter = 0.0;  // busy time varies uniformly in [1 - jitter, 1 + jitter]
  std::uint64_t seed = 1;
};

class ToyExecutor {
 public:
  explicit ToyExecutor(ExecutorConfig config);

  // Busy-work for one object, then the transform. Thread-safe.
  Buffer run(std::span<const std::uint8_t> input);
  const ExecutorConfig& config() const { return config_; }

 private:
  std::chrono::nanoseconds next_busy_time();

  ExecutorConfig config_;
  std::mutex rng_mutex_;
  std::mt19937_64 rng_;
};

}  // namespace rem::epnet
