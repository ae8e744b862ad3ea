#include "dlockout/harden.hpp"

#include <algorithm>

#include "dlockout/validate.hpp"

namespace dlockout {

namespace {

void check_ok(const Design &d, const char *pass)
{
	ValidationReport report = validate_design(d);
	if (!report.ok())
		throw HardenError(std::string(pass) + " broke the design: " + report.entries.front().message);
}

std::vector<const ObfuscationPoint *> points_by_bit(const Design &d)
{
	std::vector<const ObfuscationPoint *> pts;
	for (const ObfuscationPoint &p : d.points)
		pts.push_back(&p);
	std::sort(pts.begin(), pts.end(),
		  [](const ObfuscationPoint *a, const ObfuscationPoint *b) { return a->key_bit_index < b->key_bit_index; });
	return pts;
}

int count_comparators(const Design &d, bool shadow)
{
	int n = 0;
	for (const Node &node : d.datapath.nodes)
		if (node.kind == NodeKind::Comparator && node.shadow == shadow)
			++n;
	return n;
}

} // namespace

Design attach_comparators(const Design &d)
{
	if (d.points.empty())
		throw HardenError("design has no obfuscation points");
	if (count_comparators(d, false) > 0)
		throw HardenError("comparators already attached");

	Design out = d;
	for (const ObfuscationPoint *p : points_by_bit(out)) {
		const Node *mux = out.datapath.find_node(p->mux_node_id);
		if (!mux || mux->inputs.size() != 3)
			throw HardenError("point " + p->point_id + " has no key mux");
		std::string selector = mux->inputs.back();

		Node cmp;
		cmp.id = "cmp_" + std::to_string(p->key_bit_index);
		cmp.kind = NodeKind::Comparator;
		cmp.delay_ns = kComparatorDelayNs;
		cmp.point_id = p->point_id;
		cmp.inputs = {selector};
		cmp.output = "co_" + std::to_string(p->key_bit_index);
		out.datapath.nets.push_back({cmp.output, 1, "node:" + cmp.id});
		out.datapath.nodes.push_back(std::move(cmp));
	}
	check_ok(out, "comparator attachment");
	return out;
}

Design attach_checker(const Design &d, int threshold)
{
	if (threshold < 1)
		throw HardenError("lockout threshold must be >= 1");
	if (count_comparators(d, false) == 0)
		throw HardenError("attach comparators before the checker");
	if (d.dlockout && d.dlockout->checker)
		throw HardenError("checker already attached");

	Design out = d;
	if (!out.dlockout)
		out.dlockout.emplace();
	out.dlockout->threshold = threshold;
	out.dlockout->checker = true;
	check_ok(out, "checker attachment");
	return out;
}

Design harden_controller(const Design &d)
{
	if (!d.dlockout || !d.dlockout->checker)
		throw HardenError("attach the checker before hardening the controller");
	if (!d.dlockout->check_state.empty())
		throw HardenError("controller already hardened");

	Design out = d;
	ControllerFsm &fsm = out.controller;

	// key-check state: the always-successor of reset
	std::string check;
	for (const Transition &t : fsm.transitions)
		if (t.from == fsm.reset_state && t.cond == kCondAlways)
			check = t.to;
	if (check.empty())
		throw HardenError("reset state has no unconditional successor");

	std::string next;
	size_t check_edge = fsm.transitions.size();
	for (size_t i = 0; i < fsm.transitions.size(); ++i) {
		if (fsm.transitions[i].from != check)
			continue;
		if (fsm.transitions[i].cond != kCondAlways)
			throw HardenError("state " + check + " already branches conditionally");
		next = fsm.transitions[i].to;
		check_edge = i;
	}
	if (next.empty())
		throw HardenError("state " + check + " has no successor");

	std::string hole = "LOCKED";
	while (fsm.find_state(hole))
		hole += "_";

	FsmState bh;
	bh.name = hole;
	for (const Node &n : out.datapath.nodes)
		if (n.kind == NodeKind::Register)
			bh.control_word.reg_en[n.id] = false;
	fsm.states.push_back(std::move(bh));

	fsm.transitions[check_edge] = {check, kCondOk, next};
	fsm.transitions.push_back({check, kCondPartial, fsm.reset_state});
	fsm.transitions.push_back({check, kCondFull, hole});
	fsm.transitions.push_back({hole, kCondAlways, hole});

	out.dlockout->check_state = check;
	out.dlockout->blackhole_state = hole;
	check_ok(out, "controller hardening");
	return out;
}

Design attach_edu(const Design &d)
{
	if (count_comparators(d, false) == 0)
		throw HardenError("attach comparators before the error-detection unit");
	if (count_comparators(d, true) > 0 || (d.dlockout && d.dlockout->edu))
		throw HardenError("error-detection unit already attached");

	Design out = d;
	for (const ObfuscationPoint *p : points_by_bit(out)) {
		const Node *mux = out.datapath.find_node(p->mux_node_id);
		Node cmp;
		cmp.id = "sc_" + std::to_string(p->key_bit_index);
		cmp.kind = NodeKind::Comparator;
		cmp.delay_ns = kComparatorDelayNs;
		cmp.shadow = true;
		cmp.point_id = p->point_id;
		cmp.inputs = {mux->inputs.back()};
		cmp.output = "so_" + std::to_string(p->key_bit_index);
		out.datapath.nets.push_back({cmp.output, 1, "node:" + cmp.id});
		out.datapath.nodes.push_back(std::move(cmp));
	}
	if (!out.dlockout)
		out.dlockout.emplace();
	out.dlockout->edu = true;
	check_ok(out, "error-detection unit attachment");
	return out;
}

Design harden(const Design &d, int threshold, bool with_edu)
{
	Design out = harden_controller(attach_checker(attach_comparators(d), threshold));
	if (with_edu)
		out = attach_edu(out);
	return out;
}

OverheadSummary structural_overhead(const Design &original, const Design &hardened)
{
	OverheadSummary s;
	for (const Node &n : hardened.datapath.nodes)
		if (n.kind == NodeKind::Mux && !n.point_id.empty())
			++s.key_muxes;
	s.comparators = count_comparators(hardened, false);
	s.shadow_comparators = count_comparators(hardened, true);
	if (hardened.dlockout && hardened.dlockout->checker) {
		s.counters = 1;
		s.checker_fsms = 1;
	}
	s.added_states = (int)hardened.controller.states.size() - (int)original.controller.states.size();
	s.added_nets = (int)hardened.datapath.nets.size() - (int)original.datapath.nets.size();
	s.added_nodes = (int)hardened.datapath.nodes.size() - (int)original.datapath.nodes.size();
	return s;
}

} // namespace dlockout
