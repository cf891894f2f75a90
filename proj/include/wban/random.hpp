#pragma once

#include <cstdint>
#include <random>

namespace wban {

/// Seeded pseudo-random stream. All randomness in the library flows through
/// an explicit RandomStream argument; there is no global generator.
///
/// fork() derives an independent child stream from the base seed and a
/// stream id only, so substreams do not depend on how much of the parent
/// has been consumed. Monte Carlo trials and per-scheme runs use this to
/// stay reproducible regardless of execution order.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  RandomStream fork(std::uint64_t stream_id) const;

  double uniform();                          // [0, 1)
  int uniform_int(int lo, int hi_exclusive);  // [lo, hi)
  double normal(double mean, double stddev);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace wban
