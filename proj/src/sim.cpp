#include "dlockout/sim.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

#include "dlockout/timing.hpp"

namespace dlockout {

namespace {

struct Engine {
	const Design &d;
	const SimOptions &opts;
	const BitVector &key;

	std::unordered_map<std::string, const Node *> node_by_id;
	std::unordered_map<std::string, const Net *> net_by_id;
	std::unordered_map<int, const ObfuscationPoint *> point_by_key_bit;
	std::vector<const Node *> topo;
	std::vector<const Node *> registers;
	std::vector<const Node *> constants;
	const FsmState *blackhole = nullptr;

	// mutable run state
	std::unordered_map<std::string, std::uint64_t> regs;
	std::unordered_map<std::string, std::uint64_t> prev_mux;
	std::unordered_map<std::string, std::uint64_t> prev_regs;
	std::string current_state;
	LockoutState lk;

	Engine(const Design &design, const BitVector &k, const LockoutState &lockout, const SimOptions &options)
	    : d(design), opts(options), key(k), lk(lockout)
	{
		if ((int)key.size() != d.key_width)
			throw std::invalid_argument("key width mismatch: got " + std::to_string(key.size()) +
						    ", design expects " + std::to_string(d.key_width));
		if (!lk.valid())
			throw std::invalid_argument("invalid lockout state");
		for (const auto &n : d.datapath.nodes) {
			node_by_id[n.id] = &n;
			if (n.kind == NodeKind::Register)
				registers.push_back(&n);
			else if (n.kind == NodeKind::Constant)
				constants.push_back(&n);
		}
		for (const auto &n : d.datapath.nets)
			net_by_id[n.id] = &n;
		for (const auto &p : d.points)
			point_by_key_bit[p.key_bit_index] = &p;
		topo = combinational_topo_order(d.datapath);
		for (const auto &n : registers)
			regs[n->id] = 0;
		current_state = d.controller.reset_state;
	}

	int mask_bit_for(const ObfuscationPoint &p, int cycle) const
	{
		if (!p.masked)
			return 0;
		if (opts.measurement_mode && opts.randomize_masks)
			return (int)(mix64(opts.mask_rng_seed ^ mix64((std::uint64_t)cycle * 131 + p.key_bit_index)) & 1);
		return p.mask_bit;
	}

	// Runs one clock cycle; returns the snapshot and leaves current_state at
	// the next state.
	CycleSnapshot step(const InputVector &in, int cycle, std::map<std::string, std::uint64_t> *recorded)
	{
		for (const auto &[port, _] : in) {
			bool known = false;
			for (const auto &p : d.inputs)
				if (p.name == port)
					known = true;
			if (!known)
				throw std::invalid_argument("undefined input port: " + port);
		}

		const FsmState *state = d.controller.find_state(current_state);
		const ControlWord &cw = state->control_word;

		std::unordered_map<std::string, std::uint64_t> val;
		val.reserve(d.datapath.nets.size());

		// source nets
		for (const auto &net : d.datapath.nets) {
			if (net.driver.rfind("input:", 0) == 0) {
				auto it = in.find(net.driver.substr(6));
				val[net.id] = (it == in.end() ? 0 : it->second) & width_mask(net.width);
			} else if (net.driver.rfind("key:", 0) == 0) {
				int bit = std::atoi(net.driver.c_str() + 4);
				const ObfuscationPoint *p = point_by_key_bit.at(bit);
				val[net.id] = (std::uint64_t)(key[bit] ^ mask_bit_for(*p, cycle));
			}
		}
		for (const Node *n : constants)
			val[n->output] = n->value & width_mask(n->width);
		for (const Node *n : registers)
			val[n->output] = regs[n->id];

		// combinational evaluation
		CycleSnapshot snap;
		snap.state = current_state;
		snap.comparators.assign(d.key_width, 0);
		std::vector<int> shadow_cmp(d.key_width, 0);
		for (const Node *n : topo) {
			std::uint64_t out = 0;
			switch (n->kind) {
			case NodeKind::FunctionalUnit: {
				std::uint64_t a = val[n->inputs[0]];
				std::uint64_t b = n->inputs.size() > 1 ? val[n->inputs[1]] : 0;
				switch (n->op) {
				case OpKind::Add:
					out = a + b;
					break;
				case OpKind::Sub:
					out = a - b;
					break;
				case OpKind::Mul:
					out = a * b;
					break;
				case OpKind::And:
					out = a & b;
					break;
				case OpKind::Or:
					out = a | b;
					break;
				case OpKind::Xor:
					out = a ^ b;
					break;
				case OpKind::Not:
					out = ~a;
					break;
				case OpKind::Shl1:
					out = a << 1;
					break;
				case OpKind::Shr1:
					out = a >> 1;
					break;
				}
				break;
			}
			case NodeKind::Mux: {
				const ObfuscationPoint *p = d.point_for_mux(n->id);
				int sel;
				int data_count = (int)n->inputs.size();
				if (p) {
					sel = (int)(val[n->inputs.back()] & 1);
					data_count -= 1;
				} else {
					auto it = cw.mux_sel.find(n->id);
					sel = it == cw.mux_sel.end() ? 0 : it->second;
				}
				sel = std::min(sel, data_count - 1);
				out = val[n->inputs[sel]];
				snap.mux_out[n->id] = out & width_mask(n->width);
				break;
			}
			case NodeKind::Comparator: {
				const ObfuscationPoint *p = d.point_by_id(n->point_id);
				int sel = (int)(val[n->inputs[0]] & 1);
				int clean = sel ^ (p->masked ? 0 : p->reference_bit);
				int observed = clean;
				if (!n->shadow) {
					auto it = opts.comparator_faults.find(p->point_id);
					if (it != opts.comparator_faults.end() && it->second != StuckAt::None)
						observed = it->second == StuckAt::One ? 1 : 0;
					snap.comparators[p->key_bit_index] = observed;
				} else {
					shadow_cmp[p->key_bit_index] = clean;
				}
				out = (std::uint64_t)observed;
				break;
			}
			default:
				break;
			}
			const Net *on = net_by_id.at(n->output);
			val[n->output] = out & width_mask(on->width);
		}

		// key check
		bool hardened = d.is_hardened();
		bool at_check = hardened && current_state == d.dlockout->check_state;
		DpComp dp = DpComp::Ok;
		if (at_check) {
			bool mismatch = false;
			for (int c : snap.comparators)
				if (c)
					mismatch = true;
			if (d.dlockout->edu) {
				for (int i = 0; i < d.key_width; ++i)
					if (snap.comparators[i] ^ shadow_cmp[i])
						snap.edu_alarm = true;
			}
			if (opts.measurement_mode) {
				dp = DpComp::Ok;
			} else {
				CheckerVerdict v = checker_step(lk, mismatch);
				dp = v.dp_comp;
				lk = v.next;
			}
			snap.dp_comp = to_string(dp);
		}

		// register latch
		for (const Node *n : registers) {
			auto it = cw.reg_en.find(n->id);
			bool en = it != cw.reg_en.end() && it->second;
			if (en)
				regs[n->id] = val[n->inputs[0]] & width_mask(n->width);
			snap.regs[n->id] = regs[n->id];
		}

		// toggle accounting over storage and mux outputs
		int toggles = 0;
		for (const Node *n : registers) {
			toggles += popcount64(regs[n->id] ^ prev_regs[n->id]);
			prev_regs[n->id] = regs[n->id];
		}
		for (const auto &[mux, v] : snap.mux_out) {
			toggles += popcount64(v ^ prev_mux[mux]);
			prev_mux[mux] = v;
		}
		snap.toggles = toggles;

		// primary outputs
		bool in_blackhole = hardened && current_state == d.dlockout->blackhole_state;
		for (const auto &ob : d.outputs) {
			std::uint64_t v = 0;
			if (!in_blackhole) {
				const Net *net = net_by_id.at(ob.net);
				if (net->driver.rfind("node:", 0) == 0) {
					const Node *drv = node_by_id.at(net->driver.substr(5));
					v = drv->kind == NodeKind::Register ? regs[drv->id] : val[ob.net];
				} else {
					v = val[ob.net];
				}
			}
			snap.outputs[ob.name] = v & width_mask(ob.width);
		}

		if (recorded)
			for (const auto &id : opts.record_nets)
				(*recorded)[id] = val[id];

		// controller transition
		std::string next = current_state;
		bool found = false;
		for (const auto &t : d.controller.transitions) {
			if (t.from != current_state)
				continue;
			if (t.cond == kCondAlways) {
				next = t.to;
				found = true;
				break;
			}
			if ((t.cond == kCondOk && dp == DpComp::Ok) || (t.cond == kCondPartial && dp == DpComp::Partial) ||
			    (t.cond == kCondFull && dp == DpComp::Full)) {
				next = t.to;
				found = true;
				break;
			}
		}
		if (!found)
			next = current_state; // no matching transition: hold
		current_state = next;
		return snap;
	}
};

CycleSnapshot reset_snapshot(const Design &d)
{
	CycleSnapshot snap;
	snap.state = d.controller.reset_state;
	for (const auto &n : d.datapath.nodes)
		if (n.kind == NodeKind::Register)
			snap.regs[n.id] = 0;
	snap.comparators.assign(d.key_width, 0);
	for (const auto &ob : d.outputs)
		snap.outputs[ob.name] = 0;
	snap.toggles = 0;
	return snap;
}

} // namespace

int schedule_length(const Design &d)
{
	int n = (int)d.controller.states.size() - 1; // minus reset
	if (d.is_hardened())
		n -= 1; // minus blackhole
	return n;
}

SimResult simulate(const Design &d, const BitVector &key, const std::vector<InputVector> &inputs, int cycles,
		   const LockoutState &lockout, const SimOptions &opts)
{
	if (cycles < 1)
		throw std::invalid_argument("cycles must be >= 1");
	Engine eng(d, key, lockout, opts);
	SimResult res;
	res.trace.cycles.push_back(reset_snapshot(d));
	for (int c = 1; c <= cycles; ++c) {
		InputVector in;
		if (!inputs.empty())
			in = inputs[std::min<size_t>(c - 1, inputs.size() - 1)];
		std::map<std::string, std::uint64_t> rec;
		CycleSnapshot snap = eng.step(in, c, opts.record_nets.empty() ? nullptr : &rec);
		if (!opts.record_nets.empty())
			res.trace.recorded.push_back(std::move(rec));
		if (snap.edu_alarm)
			res.edu_alarm = true;
		res.trace.cycles.push_back(std::move(snap));
	}
	res.lockout = eng.lk;
	return res;
}

PassResult functional_output(const Design &d, const BitVector &key, const InputVector &in,
			     const LockoutState &lockout, const SimOptions &opts)
{
	Engine eng(d, key, lockout, opts);
	PassResult pr;
	int cap = 4 * ((int)d.controller.states.size() + 2);
	const std::string &reset = d.controller.reset_state;
	for (int c = 1; c <= cap; ++c) {
		bool in_blackhole = d.is_hardened() && eng.current_state == d.dlockout->blackhole_state;
		CycleSnapshot snap = eng.step(in, c, nullptr);
		pr.cycles_run = c;
		if (snap.edu_alarm)
			pr.edu_alarm = true;
		if (snap.dp_comp == to_string(DpComp::Partial))
			pr.reverted = true;
		pr.outputs = snap.outputs;
		if (in_blackhole) {
			pr.blackhole = true;
			break;
		}
		if (eng.current_state == reset && c > 1)
			break;
	}
	pr.lockout = eng.lk;
	return pr;
}

} // namespace dlockout
