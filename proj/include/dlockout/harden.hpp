#pragma once

#include <stdexcept>
#include <string>

#include "dlockout/ir.hpp"

namespace dlockout {

struct HardenError : std::runtime_error {
	explicit HardenError(const std::string &msg) : std::runtime_error(msg) {}
};

// One XOR comparator per obfuscation point, directly at the key-mux selector.
Design attach_comparators(const Design &d);

// Attempt counter + verdict logic with lockout threshold X.
Design attach_checker(const Design &d, int threshold);

// Rewrites the schedule so the first working state branches on the checker
// verdict: proceed on OK, revert to reset on PARTIAL, and fall into an
// absorbing blackhole state (all registers frozen, outputs zeroed) on FULL.
Design harden_controller(const Design &d);

// Error-detection unit: a shadow copy of every comparator, cross-checked
// against the primary so a stuck comparator raises an alarm.
Design attach_edu(const Design &d);

// attach_comparators + attach_checker + harden_controller (+ attach_edu).
Design harden(const Design &d, int threshold, bool with_edu);

struct OverheadSummary {
	int key_muxes = 0;
	int comparators = 0;
	int shadow_comparators = 0;
	int counters = 0;       // attempt counters (1 when hardened)
	int checker_fsms = 0;   // verdict units (1 when hardened)
	int added_states = 0;   // controller states beyond the original
	int added_nets = 0;
	int added_nodes = 0;
};

OverheadSummary structural_overhead(const Design &original, const Design &hardened);

} // namespace dlockout
