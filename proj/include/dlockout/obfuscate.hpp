#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dlockout/bits.hpp"
#include "dlockout/ir.hpp"

namespace dlockout {

// The designer's secret. Never serialized into the design file; exported to
// a separate keyspec file that attack harnesses must not read.
struct KeySpec {
	BitVector correct_key;
	BitVector mask_vector; // all zeros when unmasked
};

enum class SelectionPolicyKind { MaxSlack, Random };

struct SelectionPolicy {
	SelectionPolicyKind kind = SelectionPolicyKind::MaxSlack;
	std::uint64_t seed = 0;
};

enum class DecoyPolicy {
	Any,           // any equal-width non-host net (cycle-checked)
	PreferConstant // constant-driven nets when available
};

struct InsertionError : std::runtime_error {
	explicit InsertionError(const std::string &msg) : std::runtime_error(msg) {}
};

// Candidate hosts are combinational operation outputs whose slack accommodates
// the mux and comparator without touching the critical path.
std::vector<std::string> select_points(const Design &d, int m, const SelectionPolicy &policy);

struct ObfuscationResult {
	Design design;
	KeySpec keyspec;
	std::vector<ObfuscationPoint> points;
};

ObfuscationResult insert_key_muxes(const Design &d, const std::vector<std::string> &nets, std::uint64_t key_seed,
				   DecoyPolicy decoy_policy = DecoyPolicy::Any);

struct MaskingResult {
	Design design;
	KeySpec keyspec;
};

// Rewires the selected points' selectors to key XOR mask; for those key bits
// the correct key becomes the mask bit. Empty point list = every point.
MaskingResult apply_masking(const Design &d, const std::vector<std::string> &point_ids, std::uint64_t mask_seed);

std::string keyspec_to_json(const Design &d, const KeySpec &ks);
KeySpec keyspec_from_json(const std::string &text, int key_width);

} // namespace dlockout
