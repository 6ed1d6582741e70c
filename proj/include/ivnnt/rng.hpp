#ifndef IVNNT_RNG_HPP
#define IVNNT_RNG_HPP

#include <cstdint>
#include <random>

namespace ivnnt {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// stream seed for replication r of sample-size slot k under a master seed;
// replications are embarrassingly parallel with reproducible per-stream data
inline std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t slot,
                                        std::uint64_t replication) {
  return splitmix64(splitmix64(master) ^
                    splitmix64((slot + 1) * 0x9E3779B97F4A7C15ULL) ^
                    splitmix64((replication + 1) * 0xC2B2AE3D27D4EB4FULL));
}

// mt19937_64 with explicit uniform/bernoulli draws; distributions are done by
// hand so the same seed gives the same data on every platform and stdlib
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() {  // [0, 1), 53-bit resolution
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  int bernoulli(double p) { return uniform() < p ? 1 : 0; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace ivnnt

#endif
