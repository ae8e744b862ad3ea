#include "dlockout/validate.hpp"

#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "dlockout/timing.hpp"

namespace dlockout {

bool ValidationReport::has(const std::string &code) const
{
	for (const auto &e : entries)
		if (e.code == code)
			return true;
	return false;
}

namespace {

void add(ValidationReport &r, const std::string &code, const std::string &subject, const std::string &message)
{
	r.entries.push_back({code, subject, message});
}

} // namespace

ValidationReport validate_design(const Design &d)
{
	ValidationReport r;
	const DatapathGraph &g = d.datapath;

	std::unordered_map<std::string, const Net *> nets;
	for (const auto &net : g.nets) {
		if (!nets.emplace(net.id, &net).second)
			add(r, "duplicate-net", net.id, "duplicate net id " + net.id);
		if (net.width < 1 || net.width > kMaxNetWidth)
			add(r, "net-width", net.id,
			    "net " + net.id + " width " + std::to_string(net.width) + " outside [1,64]");
	}
	std::unordered_map<std::string, const Node *> nodes;
	for (const auto &node : g.nodes) {
		if (!nodes.emplace(node.id, &node).second)
			add(r, "duplicate-node", node.id, "duplicate node id " + node.id);
		if ((node.kind == NodeKind::FunctionalUnit || node.kind == NodeKind::Mux ||
		     node.kind == NodeKind::Comparator) &&
		    node.delay_ns <= 0.0)
			add(r, "delay", node.id, "node " + node.id + " has nonpositive delay");
	}

	std::unordered_set<std::string> input_ports;
	for (const auto &p : d.inputs)
		input_ports.insert(p.name);

	// Single-driver check: each net's declared driver must exist and actually
	// drive it; no other node may drive the same net.
	std::unordered_map<std::string, std::vector<std::string>> drivers;
	for (const auto &node : g.nodes)
		if (!node.output.empty())
			drivers[node.output].push_back(node.id);
	for (const auto &[net_id, ds] : drivers)
		if (ds.size() > 1) {
			std::string who;
			for (const auto &id : ds)
				who += (who.empty() ? "" : ", ") + id;
			add(r, "multiple-drivers", net_id, "net " + net_id + " has multiple drivers: " + who);
		}
	for (const auto &net : g.nets) {
		const std::string &drv = net.driver;
		if (drv.rfind("node:", 0) == 0) {
			auto it = nodes.find(drv.substr(5));
			if (it == nodes.end())
				add(r, "missing-driver", net.id, "net " + net.id + " driven by unknown node " + drv);
			else if (it->second->output != net.id)
				add(r, "driver-mismatch", net.id,
				    "net " + net.id + " declares driver " + drv + " whose output is " +
					it->second->output);
		} else if (drv.rfind("input:", 0) == 0) {
			if (!input_ports.count(drv.substr(6)))
				add(r, "missing-driver", net.id, "net " + net.id + " driven by unknown port " + drv);
		} else if (drv.rfind("key:", 0) == 0) {
			int bit = std::atoi(drv.substr(4).c_str());
			if (bit < 0 || bit >= d.key_width)
				add(r, "missing-driver", net.id,
				    "net " + net.id + " driven by key bit " + std::to_string(bit) +
					" outside key_width " + std::to_string(d.key_width));
		} else {
			add(r, "missing-driver", net.id, "net " + net.id + " has unrecognized driver '" + drv + "'");
		}
		if (drivers.count(net.id) && net.driver.rfind("node:", 0) != 0)
			add(r, "multiple-drivers", net.id,
			    "net " + net.id + " driven both by " + net.driver + " and node " + drivers[net.id][0]);
	}
	for (const auto &node : g.nodes) {
		if (!node.output.empty() && !nets.count(node.output))
			add(r, "unknown-net", node.id, "node " + node.id + " outputs undeclared net " + node.output);
		for (const auto &in : node.inputs)
			if (!nets.count(in))
				add(r, "unknown-net", node.id, "node " + node.id + " reads undeclared net " + in);
	}

	// Dangling nets: every net must be consumed by a node input, an output
	// binding, or terminate in the lockout circuitry (comparator outputs).
	std::unordered_set<std::string> consumed;
	for (const auto &node : g.nodes)
		for (const auto &in : node.inputs)
			consumed.insert(in);
	for (const auto &ob : d.outputs)
		consumed.insert(ob.net);
	std::unordered_set<std::string> checker_nets;
	for (const auto &node : g.nodes)
		if (node.kind == NodeKind::Comparator)
			checker_nets.insert(node.output);
	for (const auto &net : g.nets)
		if (!consumed.count(net.id) && !checker_nets.count(net.id))
			add(r, "dangling-net", net.id, "net " + net.id + " has no consumer");

	for (const auto &ob : d.outputs) {
		auto it = nets.find(ob.net);
		if (it == nets.end())
			add(r, "unknown-net", ob.name, "output " + ob.name + " bound to undeclared net " + ob.net);
		else if (it->second->width != ob.width)
			add(r, "width-mismatch", ob.name, "output " + ob.name + " width differs from net " + ob.net);
	}

	// Combinational cycle check; skip timing when cyclic.
	auto cycle = find_combinational_cycle(g);
	if (!cycle.empty()) {
		std::string msg = "combinational cycle through nets:";
		for (const auto &n : cycle)
			msg += " " + n;
		add(r, "comb-cycle", cycle.front(), msg);
	} else {
		SlackMap sm = compute_slack(d);
		if (sm.critical_path_ns > d.clock_period_ns + 1e-9) {
			std::string worst;
			double w = -1e18;
			for (const auto &[net, s] : sm.slack_ns)
				if (-s > w) {
					w = -s;
					worst = net;
				}
			std::ostringstream msg;
			msg << "longest combinational path " << sm.critical_path_ns << " ns exceeds clock period "
			    << d.clock_period_ns << " ns (through net " << worst << ")";
			add(r, "timing", worst, msg.str());
		}
	}

	// Controller checks.
	const ControllerFsm &fsm = d.controller;
	std::unordered_set<std::string> state_names;
	for (const auto &s : fsm.states)
		if (!state_names.insert(s.name).second)
			add(r, "duplicate-state", s.name, "duplicate controller state " + s.name);
	if (!state_names.count(fsm.reset_state))
		add(r, "reset-state", fsm.reset_state, "reset state " + fsm.reset_state + " not declared");
	std::unordered_map<std::string, std::set<std::string>> conds_by_state;
	for (const auto &t : fsm.transitions) {
		if (!state_names.count(t.from))
			add(r, "unknown-state", t.from, "transition from unknown state " + t.from);
		if (!state_names.count(t.to))
			add(r, "unknown-state", t.to, "transition to unknown state " + t.to);
		if (t.cond != kCondAlways && t.cond != kCondOk && t.cond != kCondPartial && t.cond != kCondFull)
			add(r, "bad-cond", t.from, "unknown transition condition '" + t.cond + "'");
		if (!conds_by_state[t.from].insert(t.cond).second)
			add(r, "nondeterministic", t.from, "state " + t.from + " has duplicate condition " + t.cond);
	}
	for (const auto &s : fsm.states) {
		auto it = conds_by_state.find(s.name);
		if (it == conds_by_state.end()) {
			add(r, "no-transition", s.name, "state " + s.name + " has no outgoing transition");
			continue;
		}
		const auto &cs = it->second;
		bool always = cs.count(kCondAlways) > 0;
		bool comp = cs.count(kCondOk) || cs.count(kCondPartial) || cs.count(kCondFull);
		if (always && comp)
			add(r, "nondeterministic", s.name,
			    "state " + s.name + " mixes 'always' with dp_comp conditions");
		else if (comp && !(cs.count(kCondOk) && cs.count(kCondPartial) && cs.count(kCondFull)))
			add(r, "incomplete-cond", s.name,
			    "state " + s.name + " must cover all dp_comp outcomes");
	}
	// Reachability from reset.
	if (state_names.count(fsm.reset_state)) {
		std::unordered_set<std::string> seen{fsm.reset_state};
		std::vector<std::string> work{fsm.reset_state};
		while (!work.empty()) {
			std::string s = work.back();
			work.pop_back();
			for (const auto &t : fsm.transitions)
				if (t.from == s && seen.insert(t.to).second)
					work.push_back(t.to);
		}
		for (const auto &s : fsm.states)
			if (!seen.count(s.name))
				add(r, "unreachable-state", s.name, "state " + s.name + " unreachable from reset");
	}

	// Control-word references.
	for (const auto &s : fsm.states) {
		for (const auto &[mux, sel] : s.control_word.mux_sel) {
			auto it = nodes.find(mux);
			if (it == nodes.end() || it->second->kind != NodeKind::Mux) {
				add(r, "bad-control-word", s.name,
				    "state " + s.name + " selects unknown mux " + mux);
				continue;
			}
			int data_inputs = (int)it->second->inputs.size();
			if (d.point_for_mux(mux)) {
				add(r, "bad-control-word", s.name,
				    "state " + s.name + " drives key-controlled mux " + mux);
				data_inputs -= 1; // last input is the selector net
			}
			if (sel < 0 || sel >= data_inputs)
				add(r, "bad-control-word", s.name,
				    "state " + s.name + " mux " + mux + " select out of range");
		}
		for (const auto &[reg, en] : s.control_word.reg_en) {
			(void)en;
			auto it = nodes.find(reg);
			if (it == nodes.end() || it->second->kind != NodeKind::Register)
				add(r, "bad-control-word", s.name,
				    "state " + s.name + " enables unknown register " + reg);
		}
	}

	// Obfuscation bookkeeping.
	if ((int)d.points.size() != d.key_width)
		add(r, "key-width", d.name,
		    "key_width " + std::to_string(d.key_width) + " != point count " +
			std::to_string(d.points.size()));
	std::set<int> key_bits;
	for (const auto &p : d.points) {
		if (!nodes.count(p.mux_node_id) || nodes[p.mux_node_id]->kind != NodeKind::Mux)
			add(r, "bad-point", p.point_id, "point " + p.point_id + " references unknown mux");
		if (p.key_bit_index < 0 || p.key_bit_index >= d.key_width ||
		    !key_bits.insert(p.key_bit_index).second)
			add(r, "key-bijection", p.point_id,
			    "point " + p.point_id + " key bit index not a bijection onto [0,m)");
		if (p.reference_bit != 0 && p.reference_bit != 1)
			add(r, "bad-point", p.point_id, "point " + p.point_id + " reference bit not a bit");
	}

	if (d.dlockout) {
		const auto &dl = *d.dlockout;
		if (dl.threshold < 1)
			add(r, "threshold", d.name, "lockout threshold must be >= 1");
		if (!dl.blackhole_state.empty() && !state_names.count(dl.blackhole_state))
			add(r, "unknown-state", dl.blackhole_state, "blackhole state not declared");
		if (!dl.check_state.empty() && !state_names.count(dl.check_state))
			add(r, "unknown-state", dl.check_state, "check state not declared");
	}

	return r;
}

} // namespace dlockout
