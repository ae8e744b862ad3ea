#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dlockout/attacks.hpp"
#include "dlockout/benchmark.hpp"
#include "dlockout/harden.hpp"
#include "dlockout/json_io.hpp"
#include "dlockout/metrics.hpp"
#include "dlockout/obfuscate.hpp"
#include "dlockout/power.hpp"
#include "dlockout/sim.hpp"
#include "dlockout/statefile.hpp"
#include "dlockout/timing.hpp"
#include "dlockout/validate.hpp"

using namespace dlockout;

namespace {

void write_file(const std::string &path, const std::string &text)
{
	std::ofstream f(path, std::ios::trunc);
	if (!f)
		throw std::runtime_error("cannot write file: " + path);
	f << text;
	if (!f.flush())
		throw std::runtime_error("short write: " + path);
}

std::string read_file(const std::string &path)
{
	std::ifstream f(path);
	if (!f)
		throw std::runtime_error("cannot read file: " + path);
	std::stringstream ss;
	ss << f.rdbuf();
	return ss.str();
}

std::vector<InputVector> load_inputs_file(const std::string &path)
{
	nlohmann::json j = nlohmann::json::parse(read_file(path));
	if (!j.is_array())
		throw std::runtime_error("inputs file must be a JSON array of port->value maps");
	std::vector<InputVector> out;
	for (const auto &row : j) {
		InputVector in;
		for (auto it = row.begin(); it != row.end(); ++it)
			in[it.key()] = it.value().get<std::uint64_t>();
		out.push_back(std::move(in));
	}
	return out;
}

// Attack subcommands must never be pointed at the designer's secret.
void enforce_keyspec_policy(const std::vector<std::string> &paths)
{
	for (const std::string &p : paths) {
		std::string low = p;
		for (char &c : low)
			c = (char)std::tolower((unsigned char)c);
		if (low.find("keyspec") != std::string::npos)
			throw CLI::ValidationError("policy error: attack commands may not touch keyspec paths (" +
						   p + ")");
	}
}

std::string trace_to_json(const ExecutionTrace &t)
{
	nlohmann::ordered_json j = nlohmann::ordered_json::array();
	for (const CycleSnapshot &c : t.cycles) {
		nlohmann::ordered_json row;
		row["state"] = c.state;
		row["regs"] = c.regs;
		row["mux_out"] = c.mux_out;
		row["comparators"] = c.comparators;
		row["dp_comp"] = c.dp_comp;
		row["outputs"] = c.outputs;
		row["toggles"] = c.toggles;
		row["edu_alarm"] = c.edu_alarm;
		j.push_back(row);
	}
	return j.dump(2) + "\n";
}

std::string power_to_csv(const PowerTrace &p)
{
	std::string s = "cycle,sample\n";
	char buf[64];
	for (size_t i = 0; i < p.samples.size(); ++i) {
		std::snprintf(buf, sizeof(buf), "%zu,%.6f\n", i + 1, p.samples[i]);
		s += buf;
	}
	return s;
}

void print_overhead(const OverheadSummary &o)
{
	std::printf("structural overhead:\n");
	std::printf("  key muxes:          %d\n", o.key_muxes);
	std::printf("  comparators:        %d\n", o.comparators);
	std::printf("  shadow comparators: %d\n", o.shadow_comparators);
	std::printf("  counters:           %d\n", o.counters);
	std::printf("  checker fsms:       %d\n", o.checker_fsms);
	std::printf("  added states:       %d\n", o.added_states);
	std::printf("  added nets:         %d\n", o.added_nets);
	std::printf("  added nodes:        %d\n", o.added_nodes);
}

} // namespace

int main(int argc, char **argv)
{
	CLI::App app{"key obfuscation and lockout hardening toolkit"};
	app.require_subcommand(1);

	// ---- generate ----------------------------------------------------
	auto *gen = app.add_subcommand("generate", "generate a synthetic benchmark design");
	std::string gen_kind = "fir", gen_out = "design.json";
	int gen_size = 8, gen_width = 8, gen_states = 4;
	std::uint64_t gen_seed = 1;
	gen->add_option("--kind", gen_kind, "fir | elliptic | lattice | fft-like | dpa-testbed");
	int gen_ballast = 24;
	gen->add_option("--ballast", gen_ballast, "background activity registers (dpa-testbed only)");
	gen->add_option("--size", gen_size, "tap count (>= 4)");
	gen->add_option("--width", gen_width, "datapath width (8|16|32|64)");
	gen->add_option("--states", gen_states, "schedule states (>= 4)");
	gen->add_option("--seed", gen_seed, "generator seed");
	gen->add_option("-o,--out", gen_out, "output design file");

	// ---- obfuscate ---------------------------------------------------
	auto *obf = app.add_subcommand("obfuscate", "insert key muxes");
	std::string obf_in, obf_out = "obfuscated.json", obf_keyspec = "keyspec.json";
	std::string obf_policy = "max-slack", obf_decoy = "any";
	int obf_m = 8;
	std::uint64_t obf_seed = 1;
	obf->add_option("design", obf_in, "input design file")->required();
	obf->add_option("-m,--bits", obf_m, "key width to insert");
	obf->add_option("--policy", obf_policy, "max-slack | random");
	obf->add_option("--decoy", obf_decoy, "any | prefer-constant");
	obf->add_option("--seed", obf_seed, "key/selection seed");
	obf->add_option("-o,--out", obf_out, "output design file");
	obf->add_option("--keyspec", obf_keyspec, "keyspec output file (designer secret)");

	// ---- lockout -----------------------------------------------------
	auto *lck = app.add_subcommand("lockout", "attach comparators, checker and blackhole controller");
	std::string lck_in, lck_out = "hardened.json", lck_keyspec;
	int lck_x = 5;
	bool lck_mask = false, lck_edu = false;
	std::uint64_t lck_seed = 1;
	lck->add_option("design", lck_in, "obfuscated design file")->required();
	lck->add_option("-X,--threshold", lck_x, "allowed wrong attempts before full lockout");
	lck->add_flag("--mask", lck_mask, "mask the key mux selectors");
	lck->add_flag("--edu", lck_edu, "attach the error-detection unit");
	lck->add_option("--seed", lck_seed, "mask seed");
	lck->add_option("--keyspec", lck_keyspec, "keyspec file to rewrite when masking");
	lck->add_option("-o,--out", lck_out, "output design file");

	// ---- simulate ----------------------------------------------------
	auto *sim = app.add_subcommand("simulate", "cycle-accurate simulation with persistent lockout state");
	std::string sim_in, sim_key, sim_inputs, sim_trace, sim_power, sim_state;
	int sim_cycles = 0;
	double sim_sigma = 0.0;
	std::uint64_t sim_seed = 1;
	bool sim_reset = false;
	sim->add_option("design", sim_in, "design file")->required();
	sim->add_option("--key", sim_key, "key as hex string");
	sim->add_option("--inputs", sim_inputs, "JSON array of per-cycle input maps");
	sim->add_option("--cycles", sim_cycles, "cycles to run (default: one schedule pass)");
	sim->add_option("--trace", sim_trace, "write execution trace JSON here");
	sim->add_option("--power", sim_power, "write power trace CSV here");
	sim->add_option("--sigma", sim_sigma, "power noise sigma");
	sim->add_option("--seed", sim_seed, "noise seed");
	sim->add_option("--state", sim_state, "lockout state file (default: $DLOCKOUT_STATE_DIR/<design>.lockout.json)");
	sim->add_flag("--reset-state", sim_reset, "designer-only: reinitialize the lockout state file");

	// ---- attack ------------------------------------------------------
	auto *atk = app.add_subcommand("attack", "attack harnesses");
	atk->require_subcommand(1);

	auto *br = atk->add_subcommand("brute", "oracle brute force");
	std::string br_in, br_ref, br_out;
	long long br_budget = 1000;
	std::uint64_t br_seed = 1;
	br->add_option("design", br_in, "hardened design file")->required();
	br->add_option("--reference", br_ref, "unlocked reference design for golden outputs")->required();
	br->add_option("--budget", br_budget, "candidate key budget");
	br->add_option("--seed", br_seed, "probe seed");
	br->add_option("-o,--out", br_out, "report file (default stdout)");

	auto *dp = atk->add_subcommand("dpa", "simulated differential power analysis");
	std::string dp_in, dp_resident, dp_out;
	int dp_traces = 2000;
	double dp_sigma = 1.0;
	std::uint64_t dp_seed = 1;
	int dp_p = 0;
	dp->add_option("design", dp_in, "hardened design file")->required();
	dp->add_option("--resident-key", dp_resident, "hex key provisioned into the device under test")->required();
	dp->add_option("--traces", dp_traces, "trace budget");
	dp->add_option("--sigma", dp_sigma, "measurement noise sigma");
	dp->add_option("--seed", dp_seed, "experiment seed");
	dp->add_option("--switching-bits", dp_p, "restrict input switching to p low bits (0 = all)");
	std::vector<std::string> dp_ports;
	dp->add_option("--switch-port", dp_ports, "apply the switching restriction only to these ports");
	dp->add_option("-o,--out", dp_out, "report file (default stdout)");

	auto *fa = atk->add_subcommand("fault", "stuck-at fault injection at comparators");
	std::string fa_in, fa_ref, fa_out;
	int fa_saf = 0, fa_dev = 1;
	long long fa_budget = -1;
	std::uint64_t fa_seed = 1;
	fa->add_option("design", fa_in, "hardened design file")->required();
	fa->add_option("--reference", fa_ref, "unlocked reference design for golden outputs")->required();
	fa->add_option("--saf", fa_saf, "stuck-at polarity (0 or 1)");
	fa->add_option("--devices", fa_dev, "device copies for the trial bound");
	fa->add_option("--budget", fa_budget, "candidate key budget (-1 = exhaust)");
	fa->add_option("--seed", fa_seed, "probe seed");
	fa->add_option("-o,--out", fa_out, "report file (default stdout)");

	// ---- metrics -----------------------------------------------------
	auto *met = app.add_subcommand("metrics", "analytic security metrics");
	met->require_subcommand(1);

	auto *mt = met->add_subcommand("tables", "reproduce the published tables");
	std::string mt_fmt = "text";
	mt->add_option("--format", mt_fmt, "text | csv | json");

	auto *mk = met->add_subcommand("keyprob", "P(m,n) = 1/(n! * 2^m)");
	int mk_m = 32;
	long long mk_n = 32;
	mk->add_option("-m", mk_m, "key size")->required();
	mk->add_option("-n", mk_n, "obfuscation logic count")->required();

	auto *mm = met->add_subcommand("mtd", "MTD1 = (M*N / r1^2) * (C / r0^2)");
	int mm_M = 32, mm_N = 4, mm_p = 8, mm_q = 32;
	double mm_r1sq = 0.060, mm_C = 1.0;
	mm->add_option("-M", mm_M, "key size")->required();
	mm->add_option("-N", mm_N, "control steps")->required();
	mm->add_option("-p", mm_p, "switching bits")->required();
	mm->add_option("-q", mm_q, "mux width")->required();
	mm->add_option("--r1sq", mm_r1sq, "cross-component correlation squared")->required();
	mm->add_option("-C", mm_C, "success-rate constant");

	auto *ma = met->add_subcommand("attemptprob", "f(K,X,P) = C(X,K) * P * (1-P)");
	int ma_K = 1, ma_X = 5, ma_m = 32;
	long long ma_n = 32;
	ma->add_option("-K", ma_K, "attempt index")->required();
	ma->add_option("-X", ma_X, "allowed attempts");
	ma->add_option("-m", ma_m, "key size")->required();
	ma->add_option("-n", ma_n, "obfuscation logic count")->required();

	auto *mf = met->add_subcommand("faulttrials", "ceil(2^m / (n_dev * (X-1)))");
	int mf_m = 8, mf_dev = 1, mf_X = 5;
	mf->add_option("-m", mf_m, "key size")->required();
	mf->add_option("--devices", mf_dev, "device copies");
	mf->add_option("-X", mf_X, "allowed attempts");

	// ---- report ------------------------------------------------------
	auto *rep = app.add_subcommand("report", "design and lockout overview");
	std::string rep_in, rep_orig, rep_state;
	rep->add_option("design", rep_in, "design file")->required();
	rep->add_option("--original", rep_orig, "pre-obfuscation design for overhead deltas");
	rep->add_option("--state", rep_state, "lockout state file");

	CLI11_PARSE(app, argc, argv);

	try {
		if (*gen) {
			auto kind = benchmark_kind_from_string(gen_kind);
			Design d;
			if (gen_kind == "dpa-testbed") {
				d = generate_dpa_testbed(gen_size, gen_width, gen_ballast, gen_seed);
			} else {
				if (!kind)
					throw std::runtime_error("unknown benchmark kind: " + gen_kind);
				BenchmarkOptions opts;
				opts.width = gen_width;
				opts.sched_states = gen_states;
				d = generate_benchmark(*kind, gen_size, gen_seed, opts);
			}
			save_design_file(d, gen_out);
			std::printf("wrote %s (%zu nodes, %zu nets, %zu states)\n", gen_out.c_str(),
				    d.datapath.nodes.size(), d.datapath.nets.size(), d.controller.states.size());
		} else if (*obf) {
			Design d = load_design_file(obf_in);
			SelectionPolicy pol;
			if (obf_policy == "max-slack")
				pol.kind = SelectionPolicyKind::MaxSlack;
			else if (obf_policy == "random")
				pol.kind = SelectionPolicyKind::Random;
			else
				throw std::runtime_error("unknown policy: " + obf_policy);
			pol.seed = obf_seed;
			DecoyPolicy dec;
			if (obf_decoy == "any")
				dec = DecoyPolicy::Any;
			else if (obf_decoy == "prefer-constant")
				dec = DecoyPolicy::PreferConstant;
			else
				throw std::runtime_error("unknown decoy policy: " + obf_decoy);
			std::vector<std::string> nets = select_points(d, obf_m, pol);
			ObfuscationResult res = insert_key_muxes(d, nets, obf_seed, dec);
			save_design_file(res.design, obf_out);
			write_file(obf_keyspec, keyspec_to_json(res.design, res.keyspec));
			std::printf("key width: %d\n", res.design.key_width);
			print_overhead(structural_overhead(d, res.design));
		} else if (*lck) {
			Design d = load_design_file(lck_in);
			if (d.key_width == 0)
				throw std::runtime_error("design is not key-obfuscated; run obfuscate first");
			if (d.is_hardened())
				throw std::runtime_error("design is already hardened");
			Design original = d;
			KeySpec masked_spec;
			if (lck_mask) {
				MaskingResult mr = apply_masking(d, {}, lck_seed);
				d = mr.design;
				masked_spec = mr.keyspec;
			}
			d = harden(d, lck_x, lck_edu);
			save_design_file(d, lck_out);
			if (lck_mask) {
				if (lck_keyspec.empty())
					throw std::runtime_error("--mask changes the correct key; pass --keyspec");
				write_file(lck_keyspec, keyspec_to_json(d, masked_spec));
			}
			std::string spath = sim_state.empty() ? state_path_for(d.name) : sim_state;
			save_lockout_state(spath, LockoutState::fresh(lck_x));
			std::printf("hardened design written to %s\n", lck_out.c_str());
			std::printf("lockout state initialized at %s (0, %d, FREE)\n", spath.c_str(), lck_x);
			print_overhead(structural_overhead(original, d));
		} else if (*sim) {
			Design d = load_design_file(sim_in);
			BitVector key = hex_to_bits(sim_key.empty() ? "0" : sim_key, d.key_width);
			std::vector<InputVector> inputs;
			if (!sim_inputs.empty())
				inputs = load_inputs_file(sim_inputs);

			LockoutState state = LockoutState::fresh(5);
			std::string spath;
			std::unique_ptr<StateLock> lock;
			if (d.is_hardened()) {
				spath = sim_state.empty() ? state_path_for(d.name) : sim_state;
				lock = std::make_unique<StateLock>(spath);
				if (sim_reset)
					state = LockoutState::fresh(d.dlockout->threshold);
				else
					state = load_lockout_state(spath); // fail-closed
			}
			if (sim_cycles > 0) {
				// free-running mode: every pass through the key-check
				// state counts as an attempt
				SimResult res = simulate(d, key, inputs, sim_cycles, state);
				if (d.is_hardened())
					save_lockout_state(spath, res.lockout);
				if (!sim_trace.empty())
					write_file(sim_trace, trace_to_json(res.trace));
				if (!sim_power.empty())
					write_file(sim_power,
						   power_to_csv(extract_power_trace(res.trace, sim_sigma, sim_seed)));
				const CycleSnapshot &last = res.trace.cycles.back();
				std::string outs;
				for (const auto &[name, v] : last.outputs)
					outs += " " + name + "=" + std::to_string(v);
				std::printf("phase: %s\n", to_string(res.lockout.phase));
				std::printf("final state: %s, outputs:%s\n", last.state.c_str(), outs.c_str());
			} else {
				// default: one schedule pass = one key attempt
				InputVector in = inputs.empty() ? InputVector{} : inputs.front();
				PassResult pr = functional_output(d, key, in, state);
				if (d.is_hardened())
					save_lockout_state(spath, pr.lockout);
				std::string outs;
				for (const auto &[name, v] : pr.outputs)
					outs += " " + name + "=" + std::to_string(v);
				std::printf("phase: %s\n", to_string(pr.lockout.phase));
				std::printf("pass: %s, outputs:%s\n",
					    pr.blackhole ? "blackhole" : (pr.reverted ? "reverted" : "completed"),
					    outs.c_str());
			}
		} else if (*br) {
			enforce_keyspec_policy({br_in, br_ref, br_out});
			Design d = load_design_file(br_in);
			Design ref = load_design_file(br_ref);
			GoldenSet golden = make_golden(ref, br_seed);
			int x = d.dlockout ? d.dlockout->threshold : 5;
			Oracle oracle(d, LockoutState::fresh(x));
			KeyStream ks;
			ks.width = d.key_width;
			AttackReport r = brute_force(oracle, ks, br_budget, golden);
			r.design = d.name;
			r.seed = br_seed;
			std::string j = report_to_json(r);
			if (br_out.empty())
				std::fputs(j.c_str(), stdout);
			else
				write_file(br_out, j);
		} else if (*dp) {
			enforce_keyspec_policy({dp_in, dp_out});
			Design d = load_design_file(dp_in);
			DpaOptions opts;
			opts.max_traces = dp_traces;
			opts.noise_sigma = dp_sigma;
			opts.seed = dp_seed;
			opts.switching_bits = dp_p;
			opts.switching_ports = dp_ports;
			DpaOutcome out = dpa_attack(d, hex_to_bits(dp_resident, d.key_width), opts);
			std::string j = report_to_json(out.report);
			if (dp_out.empty())
				std::fputs(j.c_str(), stdout);
			else
				write_file(dp_out, j);
		} else if (*fa) {
			enforce_keyspec_policy({fa_in, fa_ref, fa_out});
			Design d = load_design_file(fa_in);
			Design ref = load_design_file(fa_ref);
			if (fa_saf != 0 && fa_saf != 1)
				throw std::runtime_error("--saf must be 0 or 1");
			FaultSpec spec;
			spec.polarity = fa_saf == 0 ? StuckAt::Zero : StuckAt::One;
			spec.n_dev = fa_dev;
			spec.budget = fa_budget;
			GoldenSet golden = make_golden(ref, fa_seed);
			KeyStream ks;
			ks.width = d.key_width;
			AttackReport r = fault_attack(d, spec, ks, golden);
			r.seed = fa_seed;
			std::string j = report_to_json(r);
			if (fa_out.empty())
				std::fputs(j.c_str(), stdout);
			else
				write_file(fa_out, j);
		} else if (*mt) {
			TablesReport t = reproduce_tables();
			if (mt_fmt == "text")
				std::fputs(tables_to_text(t).c_str(), stdout);
			else if (mt_fmt == "csv")
				std::fputs(tables_to_csv(t).c_str(), stdout);
			else if (mt_fmt == "json")
				std::fputs(tables_to_json(t).c_str(), stdout);
			else
				throw std::runtime_error("unknown format: " + mt_fmt);
		} else if (*mk) {
			std::printf("%s\n", key_prob(mk_m, mk_n).str().c_str());
		} else if (*mm) {
			double v = mtd1(mm_M, mm_N, mm_r1sq, mtd0(correlation_r0(mm_p, mm_q), mm_C));
			std::printf("%lld\n", truncate_count(v));
		} else if (*ma) {
			std::printf("%s\n", attempt_prob(ma_K, ma_X, key_prob(ma_m, ma_n)).str().c_str());
		} else if (*mf) {
			std::printf("%lld\n", fault_trials(mf_m, mf_dev, mf_X));
		} else if (*rep) {
			Design d = load_design_file(rep_in);
			std::printf("design: %s\n", d.name.c_str());
			std::printf("key width: %d, points: %zu\n", d.key_width, d.points.size());
			int masked = 0;
			for (const auto &p : d.points)
				masked += p.masked ? 1 : 0;
			std::printf("masked points: %d\n", masked);
			if (d.dlockout)
				std::printf("lockout: threshold %d, checker %s, edu %s, check state %s, blackhole %s\n",
					    d.dlockout->threshold, d.dlockout->checker ? "yes" : "no",
					    d.dlockout->edu ? "yes" : "no", d.dlockout->check_state.c_str(),
					    d.dlockout->blackhole_state.c_str());
			SlackMap slack = compute_slack(d);
			std::printf("critical path: %.2f ns (clock %.2f ns)\n", slack.critical_path_ns,
				    d.clock_period_ns);
			if (!rep_orig.empty())
				print_overhead(structural_overhead(load_design_file(rep_orig), d));
			if (!rep_state.empty()) {
				LockoutState s = load_lockout_state(rep_state);
				std::printf("lockout state: counter %d / threshold %d, phase %s\n", s.counter,
					    s.threshold, to_string(s.phase));
			}
		}
	} catch (const std::exception &e) {
		std::fprintf(stderr, "error: %s\n", e.what());
		return 1;
	}
	return 0;
}
