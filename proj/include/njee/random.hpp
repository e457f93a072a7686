#pragma once

#include <cstdint>
#include <random>

namespace njee {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent stream seeds from a run seed.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Seed for stream `stream` of a run seeded with `base`. Distinct (base, stream)
// pairs give statistically unrelated generators.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    return mix64(mix64(base) ^ mix64(stream + 0x632BE59BD9B4E019ULL));
}

inline Rng make_rng(std::uint64_t base, std::uint64_t stream) {
    return Rng(derive_seed(base, stream));
}

}  // namespace njee
