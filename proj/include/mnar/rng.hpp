#ifndef MNAR_RNG_HPP
#define MNAR_RNG_HPP

#include <cstdint>
#include <string>

namespace mnar {

// SplitMix64 stream. Small, fast, and bit-identical across platforms,
// which is what the reproducibility guarantees rest on. Every consumer
// derives an independent substream from (master seed, index), so results
// do not depend on scheduling or record order.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0,1) using the top 53 bits.
  double uniform01() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 33;
  z *= 0xff51afd7ed558ccdULL;
  z ^= z >> 33;
  z *= 0xc4ceb9fe1a85ec53ULL;
  z ^= z >> 33;
  return z;
}

// Substream seed for item `index` under `master`. Two applications of the
// finalizer keep neighbouring indices statistically unrelated.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(mix64(master ^ 0x5851f42d4c957f2dULL) + index + 1);
}

inline SplitMix64 substream(std::uint64_t master, std::uint64_t index) {
  return SplitMix64(derive_seed(master, index));
}

// Recorded in Dataset provenance; bump if the stream derivation changes.
inline const std::string& generator_id() {
  static const std::string id = "splitmix64-v1";
  return id;
}

}  // namespace mnar

#endif  // MNAR_RNG_HPP
