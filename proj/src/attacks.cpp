#include "dlockout/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "dlockout/metrics.hpp"
#include "dlockout/power.hpp"

namespace dlockout {

Oracle::Oracle(const Design &hardened, const LockoutState &initial, SimOptions sim)
    : d_(hardened), lk_(initial), sim_(std::move(sim))
{
	if (!lk_.valid())
		throw std::invalid_argument("invalid initial lockout state");
}

PassResult Oracle::try_key(const BitVector &key, const InputVector &in)
{
	PassResult pr = functional_output(d_, key, in, lk_, sim_);
	lk_ = pr.lockout;
	++passes_;
	if (pr.blackhole)
		locked_ = true;
	return pr;
}

BitVector KeyStream::at(std::uint64_t i) const
{
	if (!explicit_keys.empty())
		return explicit_keys.at(i);
	std::uint64_t v = start + i;
	BitVector bits(width, 0);
	for (int b = 0; b < width && b < 64; ++b)
		bits[b] = (int)((v >> b) & 1ull);
	return bits;
}

std::uint64_t KeyStream::size() const
{
	if (!explicit_keys.empty())
		return explicit_keys.size();
	if (width >= 64)
		return ~0ull;
	return (1ull << width) - start;
}

GoldenSet make_golden(const Design &reference, std::uint64_t probe_seed, int probe_count)
{
	GoldenSet g;
	InputVector zeros;
	for (const Port &p : reference.inputs)
		zeros[p.name] = 0;
	g.probes.push_back(zeros);
	for (int i = 1; i <= probe_count; ++i) {
		InputVector in;
		int port = 0;
		for (const Port &p : reference.inputs)
			in[p.name] = mix64(probe_seed ^ (std::uint64_t)(i * 131 + port++)) & width_mask(p.width);
		g.probes.push_back(in);
	}
	BitVector ref_key(reference.key_width, 0);
	for (const InputVector &in : g.probes) {
		PassResult pr = functional_output(reference, ref_key, in, LockoutState::fresh(5));
		g.outputs.push_back(pr.outputs);
	}
	return g;
}

std::string report_to_json(const AttackReport &r)
{
	nlohmann::ordered_json j;
	j["strategy"] = r.strategy;
	j["design"] = r.design;
	j["key_width"] = r.key_width;
	j["seed"] = r.seed;
	j["attempts_used"] = r.attempts_used;
	j["keys_tried"] = r.keys_tried;
	j["oracle_passes"] = r.oracle_passes;
	j["success"] = r.success;
	j["locked_out"] = r.locked_out;
	j["edu_alarm"] = r.edu_alarm;
	j["recovered_key"] = r.recovered_key ? bits_to_hex(*r.recovered_key) : "";
	if (!r.correlation.empty())
		j["correlation"] = r.correlation;
	j["traces_used"] = r.traces_used;
	j["mtd_traces"] = r.mtd_traces;
	j["theoretical_trials"] = r.theoretical_trials;
	j["notes"] = r.notes;
	return j.dump(2) + "\n";
}

namespace {

bool outputs_match(const OutputMap &a, const OutputMap &b)
{
	return a == b;
}

// Shared search loop: one counted attempt per candidate (probe 0), full probe
// verification only once the first probe agrees. abort_on_alarm models a
// device that bricks when the error-detection unit fires.
AttackReport key_search(Oracle &oracle, const KeyStream &keys, long long budget, const GoldenSet &golden,
			bool abort_on_alarm)
{
	AttackReport rep;
	rep.key_width = oracle.key_width();
	std::uint64_t total = keys.size();
	for (std::uint64_t i = 0; i < total; ++i) {
		if (budget >= 0 && rep.attempts_used >= budget)
			break;
		if (oracle.locked_out())
			break;
		BitVector cand = keys.at(i);
		PassResult pr = oracle.try_key(cand, golden.probes[0]);
		++rep.attempts_used;
		++rep.keys_tried;
		if (pr.edu_alarm) {
			rep.edu_alarm = true;
			if (abort_on_alarm) {
				rep.notes = "device raised a tamper alarm; attack aborted";
				break;
			}
		}
		if (pr.blackhole) {
			rep.locked_out = true;
			break;
		}
		if (pr.reverted || !outputs_match(pr.outputs, golden.outputs[0]))
			continue;
		bool all = true;
		for (size_t p = 1; p < golden.probes.size() && all; ++p) {
			PassResult vp = oracle.try_key(cand, golden.probes[p]);
			if (vp.edu_alarm)
				rep.edu_alarm = true;
			if (vp.blackhole) {
				rep.locked_out = true;
				all = false;
			} else if (vp.reverted || !outputs_match(vp.outputs, golden.outputs[p])) {
				all = false;
			}
		}
		if (rep.locked_out)
			break;
		if (all) {
			rep.success = true;
			rep.recovered_key = cand;
			break;
		}
	}
	rep.oracle_passes = oracle.passes();
	return rep;
}

} // namespace

AttackReport brute_force(Oracle &oracle, const KeyStream &keys, long long budget, const GoldenSet &golden)
{
	if (budget < 1)
		throw std::invalid_argument("brute-force budget must be >= 1");
	AttackReport rep = key_search(oracle, keys, budget, golden, false);
	rep.strategy = "brute-force";
	return rep;
}

AttackReport fault_attack(const Design &hardened, const FaultSpec &fault, const KeyStream &keys,
			  const GoldenSet &golden)
{
	if (fault.n_dev < 1)
		throw std::invalid_argument("device count must be >= 1");
	if (fault.polarity == StuckAt::None)
		throw std::invalid_argument("fault polarity must be SAF-0 or SAF-1");

	std::set<std::string> valid_ids;
	for (const ObfuscationPoint &p : hardened.points)
		valid_ids.insert(p.point_id);
	SimOptions sim;
	if (fault.point_ids.empty()) {
		for (const std::string &id : valid_ids)
			sim.comparator_faults[id] = fault.polarity;
	} else {
		for (const std::string &id : fault.point_ids) {
			if (!valid_ids.count(id))
				throw std::invalid_argument("fault site is not a comparator output: " + id);
			sim.comparator_faults[id] = fault.polarity;
		}
	}

	int threshold = hardened.dlockout ? hardened.dlockout->threshold : 5;
	Oracle oracle(hardened, LockoutState::fresh(threshold), sim);
	bool edu = hardened.dlockout && hardened.dlockout->edu;
	AttackReport rep = key_search(oracle, keys, fault.budget, golden, edu);
	rep.strategy = "fault";
	rep.design = hardened.name;
	if (threshold >= 2)
		rep.theoretical_trials = fault_trials(hardened.key_width, fault.n_dev, threshold);
	return rep;
}

DpaOutcome dpa_attack(const Design &hardened, const BitVector &resident_key, const DpaOptions &opts)
{
	if (opts.max_traces < 1)
		throw std::invalid_argument("trace budget must be >= 1");
	if ((int)resident_key.size() != hardened.key_width)
		throw std::invalid_argument("resident key width mismatch");

	int m = hardened.key_width;
	std::vector<int> targets = opts.target_bits;
	if (targets.empty())
		for (int i = 0; i < m; ++i)
			targets.push_back(i);

	bool any_masked = false;
	for (const ObfuscationPoint &p : hardened.points)
		if (p.masked)
			any_masked = true;

	// the attacker knows the netlist structure: per-target mux data inputs
	std::vector<std::string> in0(m), in1(m);
	std::vector<std::string> record;
	for (int bit : targets) {
		const ObfuscationPoint *p = nullptr;
		for (const ObfuscationPoint &q : hardened.points)
			if (q.key_bit_index == bit)
				p = &q;
		if (!p)
			throw std::invalid_argument("no obfuscation point for key bit " + std::to_string(bit));
		const Node *mux = hardened.datapath.find_node(p->mux_node_id);
		in0[bit] = mux->inputs[0];
		in1[bit] = mux->inputs[1];
		record.push_back(mux->inputs[0]);
		record.push_back(mux->inputs[1]);
	}

	int cycles = (int)hardened.controller.states.size() * opts.passes_per_trace + 2;

	SimOptions device_opts;
	device_opts.measurement_mode = true;
	device_opts.randomize_masks = any_masked;

	SimOptions predictor_opts;
	predictor_opts.measurement_mode = true;
	predictor_opts.record_nets = record;
	BitVector zero_key(m, 0);

	// pooled Pearson accumulators per key bit
	struct Acc {
		double n = 0, sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
		void add(double x, double y)
		{
			n += 1;
			sx += x;
			sy += y;
			sxx += x * x;
			syy += y * y;
			sxy += x * y;
		}
		double r() const
		{
			double cov = n * sxy - sx * sy;
			double vx = n * sxx - sx * sx;
			double vy = n * syy - sy * sy;
			if (vx <= 0 || vy <= 0)
				return 0.0;
			return cov / std::sqrt(vx * vy);
		}
	};
	std::vector<Acc> acc(m);

	DpaOutcome out;
	out.recovered_key.assign(m, 0);
	out.correlation.assign(m, 0.0);
	int consecutive = 0;
	long long mtd = -1;

	for (int t = 1; t <= opts.max_traces; ++t) {
		std::uint64_t tseed = mix64(opts.seed ^ (std::uint64_t)t * 0x9e37ull);
		std::vector<InputVector> inputs;
		inputs.reserve(cycles);
		for (int c = 0; c < cycles; ++c) {
			InputVector in;
			int port = 0;
			for (const Port &p : hardened.inputs) {
				std::uint64_t v = mix64(tseed ^ (std::uint64_t)(c * 977 + port)) & width_mask(p.width);
				bool restrict_port =
				    opts.switching_ports.empty() ||
				    std::find(opts.switching_ports.begin(), opts.switching_ports.end(), p.name) !=
					opts.switching_ports.end();
				if (restrict_port && opts.switching_bits > 0 && opts.switching_bits < p.width) {
					std::uint64_t base =
					    mix64(tseed ^ (0xba5eull + (std::uint64_t)port)) & width_mask(p.width);
					v = base ^ (v & width_mask(opts.switching_bits));
				}
				in[p.name] = v;
				++port;
			}
			inputs.push_back(in);
		}

		SimOptions dev = device_opts;
		dev.mask_rng_seed = tseed;
		SimResult device = simulate(hardened, resident_key, inputs, cycles, LockoutState::fresh(5), dev);
		PowerTrace power = extract_power_trace(device.trace, opts.noise_sigma, tseed ^ 0xf00dull);

		SimResult pred = simulate(hardened, zero_key, inputs, cycles, LockoutState::fresh(5), predictor_opts);

		for (int c = 2; c <= cycles; ++c) {
			double sample = power.sample_at(c);
			const auto &cur = pred.trace.recorded[c - 1];
			const auto &prev = pred.trace.recorded[c - 2];
			for (int bit : targets) {
				double hd0 = popcount64(cur.at(in0[bit]) ^ prev.at(in0[bit]));
				double hd1 = popcount64(cur.at(in1[bit]) ^ prev.at(in1[bit]));
				acc[bit].add(hd1 - hd0, sample);
			}
		}

		bool all_correct = true;
		for (int bit : targets) {
			double r = acc[bit].r();
			out.correlation[bit] = r;
			out.recovered_key[bit] = r > 0 ? 1 : 0;
			int device_sel = resident_key[bit]; // unmasked: selector equals the key bit
			if (out.recovered_key[bit] != device_sel)
				all_correct = false;
		}
		consecutive = all_correct ? consecutive + 1 : 0;
		out.report.traces_used = t;
		if (consecutive >= opts.confirm_window && mtd < 0) {
			mtd = t - opts.confirm_window + 1;
			break;
		}
	}

	out.report.strategy = "dpa";
	out.report.design = hardened.name;
	out.report.key_width = m;
	out.report.seed = opts.seed;
	out.report.mtd_traces = mtd;
	out.report.correlation = out.correlation;
	out.report.success = mtd >= 0;
	out.report.recovered_key = out.recovered_key;
	if (mtd < 0)
		out.report.notes = "no stable ranking within the trace budget";
	return out;
}

} // namespace dlockout
