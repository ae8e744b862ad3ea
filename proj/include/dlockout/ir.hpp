#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dlockout {

constexpr int kIrVersion = 1;
constexpr int kMaxNetWidth = 64;

// Default combinational delays in ns. Registers are sequential endpoints.
constexpr double kMuxDelayNs = 0.5;
constexpr double kComparatorDelayNs = 0.5;

enum class NodeKind { FunctionalUnit, Register, Mux, Constant, Comparator };

enum class OpKind { Add, Sub, Mul, And, Or, Xor, Not, Shl1, Shr1 };

const char *to_string(NodeKind k);
const char *to_string(OpKind k);
std::optional<NodeKind> node_kind_from_string(const std::string &s);
std::optional<OpKind> op_kind_from_string(const std::string &s);

double default_op_delay_ns(OpKind op);

struct Port {
	std::string name;
	int width = 1;
};

// Primary output binding: a named port plus the net whose value it observes.
struct OutputBinding {
	std::string name;
	int width = 1;
	std::string net;
};

struct Node {
	std::string id;
	NodeKind kind = NodeKind::FunctionalUnit;

	OpKind op = OpKind::Add;     // FunctionalUnit only
	double delay_ns = 0.0;       // combinational kinds
	int width = 1;               // Register / Mux / Constant
	std::uint64_t value = 0;     // Constant only
	bool shadow = false;         // Comparator: EDU shadow copy
	std::string point_id;        // Mux/Comparator owned by an obfuscation point

	std::vector<std::string> inputs; // net ids, in port order
	std::string output;              // net id
};

// Net drivers are encoded as "node:<id>", "input:<port>" or "key:<bit>".
struct Net {
	std::string id;
	int width = 1;
	std::string driver;
};

struct DatapathGraph {
	std::vector<Node> nodes;
	std::vector<Net> nets;

	const Node *find_node(const std::string &id) const;
	const Net *find_net(const std::string &id) const;
};

// Transition conditions. Pre-hardening controllers only use "always"; the
// hardened key-check state branches on the checker verdict.
inline constexpr const char *kCondAlways = "always";
inline constexpr const char *kCondOk = "dp_comp==OK";
inline constexpr const char *kCondPartial = "dp_comp==PARTIAL";
inline constexpr const char *kCondFull = "dp_comp==FULL";

struct ControlWord {
	std::map<std::string, int> mux_sel;   // datapath mux id -> selected input
	std::map<std::string, bool> reg_en;   // register id -> latch enable
};

struct FsmState {
	std::string name;
	ControlWord control_word;
};

struct Transition {
	std::string from;
	std::string cond;
	std::string to;
};

struct ControllerFsm {
	std::vector<FsmState> states;
	std::vector<Transition> transitions;
	std::string reset_state;

	const FsmState *find_state(const std::string &name) const;
};

struct ObfuscationPoint {
	std::string point_id;
	std::string host_net;
	std::string mux_node_id;
	int key_bit_index = 0;
	int reference_bit = 0; // mux input index carrying the original net
	std::string decoy_net;
	bool masked = false;
	int mask_bit = 0; // meaningful iff masked
};

struct DlockoutInfo {
	int threshold = 5;
	bool checker = false;
	bool edu = false;
	std::string blackhole_state;
	std::string check_state; // schedule state where keys are verified
};

struct Design {
	std::string name;
	double clock_period_ns = 10.0;
	std::vector<Port> inputs;
	std::vector<OutputBinding> outputs;
	DatapathGraph datapath;
	ControllerFsm controller;
	int key_width = 0;
	std::vector<ObfuscationPoint> points;
	std::optional<DlockoutInfo> dlockout;

	bool is_hardened() const
	{
		return dlockout.has_value() && dlockout->checker && !dlockout->check_state.empty() &&
		       !dlockout->blackhole_state.empty();
	}
	const ObfuscationPoint *point_for_mux(const std::string &mux_id) const;
	const ObfuscationPoint *point_by_id(const std::string &point_id) const;
};

inline std::uint64_t width_mask(int width)
{
	return width >= 64 ? ~0ull : ((1ull << width) - 1ull);
}

} // namespace dlockout
