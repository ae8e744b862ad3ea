#include "dlockout/bits.hpp"

#include <cmath>
#include <stdexcept>

namespace dlockout {

std::string bits_to_hex(const BitVector &bits)
{
	int digits = ((int)bits.size() + 3) / 4;
	std::string out(digits, '0');
	for (size_t i = 0; i < bits.size(); ++i) {
		if (!bits[i])
			continue;
		int digit = (int)i / 4;
		int val = out[digits - 1 - digit] <= '9' ? out[digits - 1 - digit] - '0'
							 : out[digits - 1 - digit] - 'a' + 10;
		val |= 1 << (i % 4);
		out[digits - 1 - digit] = val < 10 ? char('0' + val) : char('a' + val - 10);
	}
	return out;
}

BitVector hex_to_bits(const std::string &hex, int width)
{
	BitVector bits(width, 0);
	int bit = 0;
	for (auto it = hex.rbegin(); it != hex.rend() && bit < width; ++it) {
		char c = *it;
		int val;
		if (c >= '0' && c <= '9')
			val = c - '0';
		else if (c >= 'a' && c <= 'f')
			val = c - 'a' + 10;
		else if (c >= 'A' && c <= 'F')
			val = c - 'A' + 10;
		else
			throw std::runtime_error("invalid hex digit in key string");
		for (int k = 0; k < 4 && bit < width; ++k, ++bit)
			bits[bit] = (val >> k) & 1;
	}
	return bits;
}

std::string bits_to_binary(const BitVector &bits)
{
	std::string out;
	for (auto it = bits.rbegin(); it != bits.rend(); ++it)
		out += *it ? '1' : '0';
	return out;
}

double gaussian_at(std::uint64_t seed, std::uint64_t index)
{
	std::uint64_t s = mix64(seed ^ mix64(index));
	std::uint64_t a = mix64(s);
	std::uint64_t b = mix64(a);
	double u1 = ((a >> 11) + 1.0) / 9007199254740993.0; // (0,1)
	double u2 = (b >> 11) / 9007199254740992.0;         // [0,1)
	return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

} // namespace dlockout
