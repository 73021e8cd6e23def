#pragma once

// Seeded, portable randomness.  Every Monte-Carlo trial and every heuristic
// restart draws from its own stream derived from (seed, stream index), so
// results do not depend on execution order or worker count.

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace malleate {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic per-stream engine: stream i of a run seeded with s is
// mt19937_64 seeded with splitmix64(s ^ splitmix64(i)).
inline std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(stream)));
}

// Uniform double in [0, 1).  mt19937_64 output is pinned by the standard, so
// this is reproducible across platforms.
inline double uniform01(std::mt19937_64& rng) {
  return (rng() >> 11) * 0x1.0p-53;
}

// Sample an index from a cumulative distribution (cdf strictly increasing to
// ~1).  Returns the first index whose cdf value exceeds the draw.
inline int sample_cdf(std::mt19937_64& rng, const Eigen::VectorXd& cdf) {
  const double u = uniform01(rng);
  int lo = 0, hi = static_cast<int>(cdf.size()) - 1;
  while (lo < hi) {
    const int mid = (lo + hi) / 2;
    if (cdf[mid] > u) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

}  // namespace malleate
