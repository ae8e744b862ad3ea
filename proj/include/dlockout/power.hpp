#pragma once

#include <cstdint>
#include <vector>

#include "dlockout/sim.hpp"

namespace dlockout {

// Hamming-distance switching power plus additive Gaussian noise. One sample
// per simulated cycle; sample_at(c) pairs with trace cycle c >= 1.
struct PowerTrace {
	std::vector<double> samples;
	double noise_sigma = 0.0;
	std::uint64_t seed = 0;

	double sample_at(int cycle) const { return samples.at(cycle - 1); }
};

PowerTrace extract_power_trace(const ExecutionTrace &t, double noise_sigma, std::uint64_t seed);

} // namespace dlockout
