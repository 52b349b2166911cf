#ifndef MCTM_PARALLEL_HPP
#define MCTM_PARALLEL_HPP

#include <cstdint>
#include <functional>
#include <limits>

namespace mctm {

/// Worker count: hardware concurrency, capped by the MCTM_THREADS environment variable.
int worker_count();

/// Runs body(i) for i in [0, n) on worker_count() threads, in contiguous chunks.
/// The first exception thrown by any body is rethrown after all workers finish.
void parallel_for(int n, const std::function<void(int)>& body);

/// Counter-based generator: the k-th output of stream s under key `seed` is
/// splitmix64 of (seed, s, k), so streams are independent of scheduling.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(mix(seed ^ mix(stream + 0x632be59bd9b4e019ULL))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  /// Seed for a derived stream, e.g. replicate b of a bootstrap.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t index) { return mix(seed + mix(index + 1)); }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace mctm

#endif
