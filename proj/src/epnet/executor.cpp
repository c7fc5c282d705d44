#include "rem/epnet/executor.hpp"

#include <algorithm>

namespace rem::epnet {

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

Buffer toy_transform(std::span<const std::uint8_t> input) {
  Buffer out{'E', 'P', 'O', '1'};
  out.reserve(kToyOutputBytes);
  const std::uint64_t h = fnv1a64(input);
  for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(h >> shift));
  const auto n = static_cast<std::uint32_t>(input.size());
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(n >> shift));
  return out;
}

void busy_wait(std::chrono::nanoseconds duration) {
  if (duration <= std::chrono::nanoseconds::zero()) return;
  const auto until = std::chrono::steady_clock::now() + duration;
  volatile std::uint64_t sink = 0;
  while (std::chrono::steady_clock::now() < until) {
    for (int i = 0; i < 256; ++i) sink = sink * 6364136223846793005ull + 1442695040888963407ull;
  }
}

Buffer stage_copy(std::span<const std::uint8_t> bytes) {
  Buffer out(bytes.begin(), bytes.end());
  volatile std::uint64_t checksum = fnv1a64(out);
  (void)checksum;
  return out;
}

double timed_average(const std::function<void()>& stage, std::chrono::nanoseconds min_total,
                     int max_reps) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  int reps = 0;
  clock::duration elapsed{};
  do {
    stage();
    ++reps;
    elapsed = clock::now() - start;
  } while (elapsed < min_total && reps < max_reps);
  return std::chrono::duration<double>(elapsed).count() / reps;
}

ToyExecutor::ToyExecutor(ExecutorConfig config) : config_(config), rng_(config.seed) {}

std::chrono::nanoseconds ToyExecutor::next_busy_time() {
  const auto base = std::chrono::duration_cast<std::chrono::nanoseconds>(config_.busy_per_object);
  if (config_.jitter <= 0.0) return base;
  const double j = std::clamp(config_.jitter, 0.0, 1.0);
  double factor;
  {
    std::lock_guard lock(rng_mutex_);
    factor = std::uniform_real_distribution<double>(1.0 - j, 1.0 + j)(rng_);
  }
  return std::chrono::nanoseconds(static_cast<std::int64_t>(static_cast<double>(base.count()) * factor));
}

Buffer ToyExecutor::run(std::span<const std::uint8_t> input) {
  busy_wait(next_busy_time());
  return toy_transform(input);
}

}  // namespace rem::epnet
