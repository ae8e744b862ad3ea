#include "dlockout/lockout.hpp"

namespace dlockout {

const char *to_string(LockoutPhase p)
{
	switch (p) {
	case LockoutPhase::Free:
		return "FREE";
	case LockoutPhase::Partial:
		return "PARTIAL";
	case LockoutPhase::Full:
		return "FULL";
	}
	return "?";
}

const char *to_string(DpComp c)
{
	switch (c) {
	case DpComp::Ok:
		return "OK";
	case DpComp::Partial:
		return "PARTIAL";
	case DpComp::Full:
		return "FULL";
	}
	return "?";
}

LockoutPhase phase_for(int counter, int threshold)
{
	if (counter >= threshold)
		return LockoutPhase::Full;
	if (counter > 0)
		return LockoutPhase::Partial;
	return LockoutPhase::Free;
}

bool LockoutState::valid() const
{
	return threshold >= 1 && counter >= 0 && counter <= threshold && phase == phase_for(counter, threshold);
}

LockoutState LockoutState::fresh(int threshold)
{
	return LockoutState{0, threshold, LockoutPhase::Free};
}

LockoutState lockout_step(const LockoutState &s, bool any_mismatch)
{
	if (!any_mismatch || s.phase == LockoutPhase::Full)
		return s;
	LockoutState next = s;
	next.counter = s.counter + 1;
	next.phase = phase_for(next.counter, next.threshold);
	return next;
}

CheckerVerdict checker_step(const LockoutState &s, bool any_mismatch)
{
	CheckerVerdict v;
	if (s.phase == LockoutPhase::Full) {
		v.dp_comp = DpComp::Full;
		v.next = s;
		return v;
	}
	v.next = lockout_step(s, any_mismatch);
	if (!any_mismatch)
		v.dp_comp = DpComp::Ok;
	else
		v.dp_comp = v.next.phase == LockoutPhase::Full ? DpComp::Full : DpComp::Partial;
	return v;
}

} // namespace dlockout
