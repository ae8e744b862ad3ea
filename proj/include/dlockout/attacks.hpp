#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dlockout/bits.hpp"
#include "dlockout/ir.hpp"
#include "dlockout/sim.hpp"

namespace dlockout {

// Black-box device: the attacker submits a key and an input vector and
// observes primary outputs plus the externally visible lockout response.
// Internal nets, comparators and the counter stay hidden.
class Oracle {
public:
	Oracle(const Design &hardened, const LockoutState &initial, SimOptions sim = {});

	PassResult try_key(const BitVector &key, const InputVector &in);

	int key_width() const { return d_.key_width; }
	long long passes() const { return passes_; }
	bool locked_out() const { return locked_; }
	// Owner-side access for state persistence; not part of the attack surface.
	const LockoutState &state() const { return lk_; }

private:
	Design d_;
	LockoutState lk_;
	SimOptions sim_;
	long long passes_ = 0;
	bool locked_ = false;
};

// Deterministic candidate-key enumerator: an explicit list, or numeric order
// starting from `start`.
struct KeyStream {
	int width = 0;
	std::vector<BitVector> explicit_keys;
	std::uint64_t start = 0;

	BitVector at(std::uint64_t i) const;
	std::uint64_t size() const;
};

// Fixed probe inputs with golden responses from the unlocked reference design.
struct GoldenSet {
	std::vector<InputVector> probes;
	std::vector<OutputMap> outputs;
};

GoldenSet make_golden(const Design &reference, std::uint64_t probe_seed, int probe_count = 8);

struct AttackReport {
	std::string strategy;
	std::string design;
	int key_width = 0;
	std::uint64_t seed = 0;
	long long attempts_used = 0; // candidate keys submitted
	long long keys_tried = 0;
	long long oracle_passes = 0;
	bool success = false;
	bool locked_out = false;
	bool edu_alarm = false;
	std::optional<BitVector> recovered_key;
	// DPA: per-bit correlation of the winning hypothesis; empirical MTD.
	std::vector<double> correlation;
	long long traces_used = 0;
	long long mtd_traces = -1; // -1: no stable ranking reached
	long long theoretical_trials = 0;
	std::string notes;
	double wall_clock_s = 0.0; // informational; excluded from serialization
};

// Deterministic JSON (wall clock deliberately omitted so identical runs are
// byte-identical).
std::string report_to_json(const AttackReport &r);

AttackReport brute_force(Oracle &oracle, const KeyStream &keys, long long budget, const GoldenSet &golden);

struct FaultSpec {
	std::vector<std::string> point_ids; // empty = every comparator
	StuckAt polarity = StuckAt::Zero;
	int n_dev = 1;
	long long budget = -1; // -1: exhaust the stream
};

AttackReport fault_attack(const Design &hardened, const FaultSpec &fault, const KeyStream &keys,
			  const GoldenSet &golden);

struct DpaOptions {
	int max_traces = 2000;
	double noise_sigma = 0.0;
	std::uint64_t seed = 1;
	int confirm_window = 10; // consecutive fully-correct estimates
	int passes_per_trace = 2;
	// When > 0, only this many low-order input bits switch between cycles
	// (the p of the r0 = sqrt(p/q) model); 0 = full-width switching.
	int switching_bits = 0;
	// Ports the switching restriction applies to; empty = all ports. Lets a
	// sweep vary the targeted datapath activity while background ports keep
	// switching at full width.
	std::vector<std::string> switching_ports;
	std::vector<int> target_bits; // empty = every key bit
};

struct DpaOutcome {
	AttackReport report;
	BitVector recovered_key;
	std::vector<double> correlation; // per key bit
};

// Passive power analysis against a device running its resident (correct) key.
// The counter is frozen during observation; masked cells draw a fresh mask
// every cycle.
DpaOutcome dpa_attack(const Design &hardened, const BitVector &resident_key, const DpaOptions &opts);

} // namespace dlockout
