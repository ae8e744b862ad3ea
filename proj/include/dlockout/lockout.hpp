#pragma once

#include <string>

namespace dlockout {

enum class LockoutPhase { Free, Partial, Full };

enum class DpComp { Ok, Partial, Full };

const char *to_string(LockoutPhase p);
const char *to_string(DpComp c);

// Persistent wrong-attempt counter; models the non-volatile storage the
// lockout circuitry relies on. phase is derived from counter and threshold.
struct LockoutState {
	int counter = 0;
	int threshold = 5;
	LockoutPhase phase = LockoutPhase::Free;

	bool valid() const;
	static LockoutState fresh(int threshold);
};

LockoutPhase phase_for(int counter, int threshold);

// Pure attempt-count transition: increments on a mismatch unless already FULL.
LockoutState lockout_step(const LockoutState &s, bool any_mismatch);

// Checker verdict at the key-check step. A FULL incoming state dominates
// every comparator outcome.
struct CheckerVerdict {
	DpComp dp_comp = DpComp::Ok;
	LockoutState next;
};

CheckerVerdict checker_step(const LockoutState &s, bool any_mismatch);

} // namespace dlockout
