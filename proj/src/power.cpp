#include "dlockout/power.hpp"

#include <stdexcept>

namespace dlockout {

PowerTrace extract_power_trace(const ExecutionTrace &t, double noise_sigma, std::uint64_t seed)
{
	if (noise_sigma < 0.0)
		throw std::invalid_argument("noise_sigma must be >= 0");
	PowerTrace pt;
	pt.noise_sigma = noise_sigma;
	pt.seed = seed;
	pt.samples.reserve(t.cycles.size() - 1);
	for (size_t c = 1; c < t.cycles.size(); ++c) {
		double noise = noise_sigma > 0.0 ? noise_sigma * gaussian_at(seed, c) : 0.0;
		pt.samples.push_back((double)t.cycles[c].toggles + noise);
	}
	return pt;
}

} // namespace dlockout
