#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace trigonal {

// Error taxonomy mapped onto the CLI exit-code contract.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;  // exit 4
};
struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;  // exit 3
};
struct BoundViolation : std::runtime_error {
  using std::runtime_error::runtime_error;  // exit 2
};

// Deterministic 64-bit generator (splitmix64 core). We avoid the standard
// distributions so that streams are identical across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed + 0x9e3779b97f4a7c15ULL) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, n)
  uint64_t next_below(uint64_t n) {
    // Multiply-shift; bias negligible for our n (never near 2^64).
    return (uint64_t)(((__uint128_t)next_u64() * n) >> 64);
  }

  double next_double() {  // [0,1)
    return (double)(next_u64() >> 11) * 0x1.0p-53;
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = (size_t)next_below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  uint64_t state_;
};

// Chunked parallel map over [0, n). Each index writes only its own slots, so
// results are independent of scheduling. Falls back to serial for small n.
inline void parallel_for(size_t n, const std::function<void(size_t)>& fn,
                         size_t grain = 64) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw <= 1 || n < 2 * grain) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  unsigned nthreads = std::min<size_t>(hw, (n + grain - 1) / grain);
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  std::atomic<size_t> cursor{0};
  for (unsigned t = 0; t < nthreads; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        size_t begin = cursor.fetch_add(grain);
        if (begin >= n) return;
        size_t end = std::min(n, begin + grain);
        for (size_t i = begin; i < end; ++i) fn(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace trigonal
