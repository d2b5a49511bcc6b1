#pragma once

#include <cstdint>
#include <random>

namespace pfo {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Key of the counter-based stream (seed, a, b). Distinct tuples give unrelated keys.
constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

inline std::mt19937_64 keyed_engine(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  return std::mt19937_64(derive_key(seed, a, b));
}

// Domain tags so that independent consumers of one user seed never share a stream.
inline constexpr std::uint64_t kTagNoise = 0x6e6f697365ULL;
inline constexpr std::uint64_t kTagStream = 0x73747265616dULL;
inline constexpr std::uint64_t kTagFtpl = 0x6674706cULL;
inline constexpr std::uint64_t kTagData = 0x64617461ULL;
inline constexpr std::uint64_t kTagProbe = 0x70726f6265ULL;

}  // namespace pfo
