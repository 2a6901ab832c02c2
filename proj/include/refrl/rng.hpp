#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>
#include <utility>
#include <vector>

namespace refrl {

// All randomness in the toolkit flows from one root seed through
// derive_stream(); no ambient entropy, no shared generator state.
// The generator is splitmix64 so that identical seeds give identical
// byte streams on every platform and standard library.

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

class RngStream {
 public:
  explicit RngStream(std::uint64_t state) : state_(state) {}

  std::uint64_t next_u64() { return splitmix64_next(state_); }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi], both inclusive. Modulo bias is far below
  // anything observable at toy scale.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(next_u64() % span);
  }

  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(
        uniform_int(0, static_cast<std::int64_t>(v.size()) - 1))];
  }

  // Fisher-Yates.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(
          uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

// Derives a child seed from (seed, name, indices). Streams with different
// names or indices are independent for practical purposes.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view name,
                                 std::initializer_list<std::uint64_t> indices = {}) {
  std::uint64_t s = seed ^ 0xa0761d6478bd642fULL;
  splitmix64_next(s);
  s ^= fnv1a64(name);
  splitmix64_next(s);
  for (auto idx : indices) {
    s ^= idx + 0x8ebc6af09c88c6e3ULL;
    splitmix64_next(s);
  }
  return s;
}

inline RngStream derive_stream(std::uint64_t seed, std::string_view name,
                               std::initializer_list<std::uint64_t> indices = {}) {
  return RngStream(derive_seed(seed, name, indices));
}

}  // namespace refrl
