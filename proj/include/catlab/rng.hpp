#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace catlab {

using Rng = std::mt19937_64;

// Stream splitting: every consumer of randomness asks for a generator keyed by
// (global seed, purpose, id...). Streams never share state, so a per-sample
// computation draws the same numbers whether it runs serially or on a worker
// thread.
std::uint64_t mix64(std::uint64_t v);
std::uint64_t hash_purpose(std::string_view purpose);

Rng make_stream(std::uint64_t seed, std::string_view purpose, std::uint64_t a = 0,
                std::uint64_t b = 0);

double uniform01(Rng& rng);
double uniform(Rng& rng, double lo, double hi);

}  // namespace catlab
