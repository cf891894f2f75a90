#include "wban/random.hpp"

#include <limits>
#include <stdexcept>

namespace wban {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RandomStream::RandomStream(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

RandomStream RandomStream::fork(std::uint64_t stream_id) const {
  return RandomStream(splitmix64(seed_ ^ splitmix64(stream_id + 0x632be59bd9b4e019ULL)));
}

double RandomStream::uniform() {
  // 53 random mantissa bits; identical on every platform, unlike
  // std::uniform_real_distribution.
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

int RandomStream::uniform_int(int lo, int hi_exclusive) {
  if (hi_exclusive <= lo) throw std::invalid_argument("uniform_int: empty range");
  const auto span = static_cast<std::uint64_t>(hi_exclusive - lo);
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % span;
  std::uint64_t v = engine_();
  while (v >= limit) v = engine_();
  return lo + static_cast<int>(v % span);
}

double RandomStream::normal(double mean, double stddev) {
  return mean + stddev * normal_(engine_);
}

}  // namespace wban
