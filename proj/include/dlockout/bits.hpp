#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dlockout {

// A key or mask as individual bits, index 0 = key bit 0.
using BitVector = std::vector<int>;

std::string bits_to_hex(const BitVector &bits);
BitVector hex_to_bits(const std::string &hex, int width);
std::string bits_to_binary(const BitVector &bits);

inline int popcount64(std::uint64_t v)
{
	return __builtin_popcountll(v);
}

// splitmix64; used wherever bit-stable deterministic streams are needed.
inline std::uint64_t mix64(std::uint64_t x)
{
	x += 0x9e3779b97f4a7c15ull;
	x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
	x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
	return x ^ (x >> 31);
}

// Deterministic standard normal from a (seed, index) pair via Box-Muller.
double gaussian_at(std::uint64_t seed, std::uint64_t index);

} // namespace dlockout
