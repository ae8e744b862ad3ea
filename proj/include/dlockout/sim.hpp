#pragma once

#include <map>
#include <string>
#include <vector>

#include "dlockout/bits.hpp"
#include "dlockout/ir.hpp"
#include "dlockout/lockout.hpp"

namespace dlockout {

using InputVector = std::map<std::string, std::uint64_t>;
using OutputMap = std::map<std::string, std::uint64_t>;

enum class StuckAt { None, Zero, One };

struct SimOptions {
	// point_id -> stuck-at fault injected at the primary comparator output
	std::map<std::string, StuckAt> comparator_faults;
	// Passive power-observation mode: the counter is frozen and the checker
	// reports OK so the schedule completes regardless of comparator values.
	bool measurement_mode = false;
	// In measurement mode, masked cells redraw their mask bit every cycle
	// (models the random mask source of the masked obfuscation cell).
	bool randomize_masks = false;
	std::uint64_t mask_rng_seed = 0;
	// Nets whose per-cycle values should be captured (attack predictors).
	std::vector<std::string> record_nets;
};

struct CycleSnapshot {
	std::string state; // controller state active during this cycle
	std::map<std::string, std::uint64_t> regs;
	std::map<std::string, std::uint64_t> mux_out;
	std::vector<int> comparators; // observed (post-fault), indexed by key bit
	std::string dp_comp;          // empty when no check happened this cycle
	OutputMap outputs;
	int toggles = 0; // Hamming distance of storage + mux outputs vs previous
	bool edu_alarm = false;
};

struct ExecutionTrace {
	std::vector<CycleSnapshot> cycles; // [0] is the reset snapshot
	std::vector<std::map<std::string, std::uint64_t>> recorded; // per sim cycle
};

struct SimResult {
	ExecutionTrace trace;
	LockoutState lockout;
	bool edu_alarm = false;
};

SimResult simulate(const Design &d, const BitVector &key, const std::vector<InputVector> &inputs, int cycles,
		   const LockoutState &lockout, const SimOptions &opts = {});

// One schedule pass under a constant input vector; the black-box oracle view.
struct PassResult {
	OutputMap outputs;
	LockoutState lockout;
	bool reverted = false;  // partial lockout ended the pass early
	bool blackhole = false; // pass ended in (or started from) full lockout
	bool edu_alarm = false;
	int cycles_run = 0;
};

PassResult functional_output(const Design &d, const BitVector &key, const InputVector &in,
			     const LockoutState &lockout, const SimOptions &opts = {});

// Number of schedule states (excluding reset and blackhole).
int schedule_length(const Design &d);

} // namespace dlockout
