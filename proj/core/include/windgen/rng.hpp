#pragma once

#include <cstdint>
#include <random>

namespace windgen {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
	x += 0x9e3779b97f4a7c15ULL;
	x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
	x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
	return x ^ (x >> 31);
}

/// Seed of the stream owned by (region, realization):
/// master XOR mix64(mix64(region) + realization).
constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t region,
                                    std::uint64_t realization) noexcept {
	return master ^ mix64(mix64(region) + realization);
}

}  // namespace windgen
