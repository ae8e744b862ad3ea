#include "dlockout/ir.hpp"

namespace dlockout {

const char *to_string(NodeKind k)
{
	switch (k) {
	case NodeKind::FunctionalUnit:
		return "fu";
	case NodeKind::Register:
		return "reg";
	case NodeKind::Mux:
		return "mux";
	case NodeKind::Constant:
		return "const";
	case NodeKind::Comparator:
		return "comparator";
	}
	return "?";
}

const char *to_string(OpKind k)
{
	switch (k) {
	case OpKind::Add:
		return "add";
	case OpKind::Sub:
		return "sub";
	case OpKind::Mul:
		return "mul";
	case OpKind::And:
		return "and";
	case OpKind::Or:
		return "or";
	case OpKind::Xor:
		return "xor";
	case OpKind::Not:
		return "not";
	case OpKind::Shl1:
		return "shl1";
	case OpKind::Shr1:
		return "shr1";
	}
	return "?";
}

std::optional<NodeKind> node_kind_from_string(const std::string &s)
{
	if (s == "fu")
		return NodeKind::FunctionalUnit;
	if (s == "reg")
		return NodeKind::Register;
	if (s == "mux")
		return NodeKind::Mux;
	if (s == "const")
		return NodeKind::Constant;
	if (s == "comparator")
		return NodeKind::Comparator;
	return std::nullopt;
}

std::optional<OpKind> op_kind_from_string(const std::string &s)
{
	static const std::map<std::string, OpKind> table = {
	    {"add", OpKind::Add}, {"sub", OpKind::Sub},   {"mul", OpKind::Mul},
	    {"and", OpKind::And}, {"or", OpKind::Or},     {"xor", OpKind::Xor},
	    {"not", OpKind::Not}, {"shl1", OpKind::Shl1}, {"shr1", OpKind::Shr1},
	};
	auto it = table.find(s);
	if (it == table.end())
		return std::nullopt;
	return it->second;
}

double default_op_delay_ns(OpKind op)
{
	switch (op) {
	case OpKind::Add:
	case OpKind::Sub:
		return 2.0;
	case OpKind::Mul:
		return 4.0;
	default:
		return 1.0;
	}
}

const Node *DatapathGraph::find_node(const std::string &id) const
{
	for (const auto &n : nodes)
		if (n.id == id)
			return &n;
	return nullptr;
}

const Net *DatapathGraph::find_net(const std::string &id) const
{
	for (const auto &n : nets)
		if (n.id == id)
			return &n;
	return nullptr;
}

const FsmState *ControllerFsm::find_state(const std::string &name) const
{
	for (const auto &s : states)
		if (s.name == name)
			return &s;
	return nullptr;
}

const ObfuscationPoint *Design::point_for_mux(const std::string &mux_id) const
{
	for (const auto &p : points)
		if (p.mux_node_id == mux_id)
			return &p;
	return nullptr;
}

const ObfuscationPoint *Design::point_by_id(const std::string &point_id) const
{
	for (const auto &p : points)
		if (p.point_id == point_id)
			return &p;
	return nullptr;
}

} // namespace dlockout
