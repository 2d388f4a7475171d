#ifndef SVW_RNG_HPP_
#define SVW_RNG_HPP_

#include <cstdint>

namespace svw {

// Counter-based Gaussian draws: the value for (seed, path, step, mode) is a
// pure function of the key, so ensembles do not depend on scheduling order.
namespace rng {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t key_hash(std::uint64_t seed, std::uint64_t path,
                              std::uint64_t step, std::uint64_t mode,
                              std::uint64_t lane) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ path);
  h = mix64(h ^ step);
  h = mix64(h ^ mode);
  return mix64(h ^ lane);
}

// Uniform in (0, 1) from the top 53 bits.
inline double to_open_unit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Standard normal via Box-Muller.
double standard_normal(std::uint64_t seed, std::uint64_t path,
                       std::uint64_t step, std::uint64_t mode);

}  // namespace rng
}  // namespace svw

#endif  // SVW_RNG_HPP_
