#include "catlab/rng.hpp"

namespace catlab {

std::uint64_t mix64(std::uint64_t v) {
  // splitmix64 finalizer
  v += 0x9e3779b97f4a7c15ULL;
  v = (v ^ (v >> 30)) * 0xbf58476d1ce4e5b9ULL;
  v = (v ^ (v >> 27)) * 0x94d049bb133111ebULL;
  return v ^ (v >> 31);
}

std::uint64_t hash_purpose(std::string_view purpose) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char ch : purpose) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Rng make_stream(std::uint64_t seed, std::string_view purpose, std::uint64_t a,
                std::uint64_t b) {
  std::uint64_t s = mix64(seed);
  s = mix64(s ^ hash_purpose(purpose));
  s = mix64(s ^ mix64(a + 0x51ed27ULL));
  s = mix64(s ^ mix64(b + 0x2545f491ULL));
  return Rng(s);
}

double uniform01(Rng& rng) {
  // 53 random mantissa bits in [0, 1)
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

}  // namespace catlab
