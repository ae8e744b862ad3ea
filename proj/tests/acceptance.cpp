// Acceptance gate: one pass/fail line per criterion, exit code = number of
// failed criteria. argv[1] must point at the command-line binary.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <json.hpp>

#include "dlockout/attacks.hpp"
#include "dlockout/benchmark.hpp"
#include "dlockout/harden.hpp"
#include "dlockout/json_io.hpp"
#include "dlockout/metrics.hpp"
#include "dlockout/obfuscate.hpp"
#include "dlockout/statefile.hpp"
#include "test_util.hpp"

using namespace dlockout;

namespace {

std::string g_cli;

struct RunResult {
	int exit_code;
	std::string output;
};

RunResult run_cli(const std::string &args)
{
	std::string cmd = "'" + g_cli + "' " + args + " 2>&1";
	FILE *p = popen(cmd.c_str(), "r");
	if (!p)
		return {127, ""};
	std::string out;
	char buf[4096];
	size_t n;
	while ((n = fread(buf, 1, sizeof(buf), p)) > 0)
		out.append(buf, n);
	int st = pclose(p);
	return {WIFEXITED(st) ? WEXITSTATUS(st) : 128, out};
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
	return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool expect(bool ok, const char *what, std::string &why)
{
	if (!ok && why.empty())
		why = what;
	return ok;
}

struct Pipeline {
	Design original;
	Design obfuscated;
	Design hardened;
	KeySpec ks;
};

Pipeline build(BenchmarkKind kind, int size, int m, std::uint64_t seed, int X, bool edu = false,
	       bool mask = false, DecoyPolicy decoy = DecoyPolicy::Any)
{
	Pipeline p;
	p.original = generate_benchmark(kind, size, seed);
	ObfuscationResult res = insert_key_muxes(p.original, select_points(p.original, m, {}), seed, decoy);
	p.obfuscated = res.design;
	p.ks = res.keyspec;
	if (mask) {
		MaskingResult mr = apply_masking(p.obfuscated, {}, seed ^ 0x77);
		p.obfuscated = mr.design;
		p.ks = mr.keyspec;
	}
	p.hardened = harden(p.obfuscated, X, edu);
	return p;
}

std::vector<int> comparators_at_check(const Design &hardened, const BitVector &key)
{
	std::vector<InputVector> in(8, {{"x", 5}});
	SimResult r = simulate(hardened, key, in, 8, LockoutState::fresh(hardened.dlockout->threshold));
	for (const auto &c : r.trace.cycles)
		if (!c.dp_comp.empty())
			return c.comparators;
	return {};
}

double median(std::vector<long long> v)
{
	std::sort(v.begin(), v.end());
	size_t n = v.size();
	return n % 2 ? (double)v[n / 2] : ((double)v[n / 2 - 1] + (double)v[n / 2]) / 2.0;
}

// ---- criterion 1: trace-count table reproduction ------------------------

bool criterion1(std::string &why)
{
	auto t0 = std::chrono::steady_clock::now();
	RunResult r = run_cli("metrics tables --format json");
	double dt = seconds_since(t0);
	if (!expect(r.exit_code == 0, "tables command failed", why))
		return false;
	nlohmann::json j = nlohmann::json::parse(r.output, nullptr, false);
	if (!expect(!j.is_discarded(), "tables output is not JSON", why))
		return false;
	const auto &rows = j.at("trace_counts");
	if (!expect(rows.size() == 9, "expected 9 trace-count rows", why))
		return false;
	int flagged = 0;
	for (const auto &row : rows) {
		long long mtd1v = row.at("mtd1").get<long long>();
		long long pub = row.at("published").get<long long>();
		if (row.at("flagged").get<bool>()) {
			++flagged;
			if (!expect(row.at("N") == 4 && row.at("p") == 32, "wrong cell flagged", why))
				return false;
			if (!expect(mtd1v == 11636 && pub == 12800, "flagged cell values wrong", why))
				return false;
		} else if (!expect(std::llabs(mtd1v - pub) <= 1, "unflagged cell off by more than 1", why)) {
			return false;
		}
	}
	if (!expect(flagged == 1, "expected exactly one flagged trace-count cell", why))
		return false;
	return expect(dt < 1.0, "tables ran slower than 1 s", why);
}

// ---- criterion 2: key-probability table reproduction --------------------

bool criterion2(std::string &why)
{
	auto t0 = std::chrono::steady_clock::now();
	RunResult r = run_cli("metrics tables --format json");
	double dt = seconds_since(t0);
	if (!expect(r.exit_code == 0, "tables command failed", why))
		return false;
	nlohmann::json j = nlohmann::json::parse(r.output, nullptr, false);
	if (!expect(!j.is_discarded(), "tables output is not JSON", why))
		return false;
	const auto &rows = j.at("key_prob");
	if (!expect(rows.size() == 15, "expected 15 key-probability rows", why))
		return false;
	bool spot_p = false, spot_f = false;
	for (const auto &row : rows) {
		if (!expect(!row.at("flagged").get<bool>(), "key-probability cell mismatch", why))
			return false;
		std::string P = row.at("P").get<std::string>();
		std::string f = row.at("f").get<std::string>();
		if (!expect(std::isfinite(SciNumber::parse(P).log10_value) &&
				std::isfinite(SciNumber::parse(f).log10_value),
			    "non-finite rendered probability", why))
			return false;
		if (row.at("m") == 32 && P == "0.08e-44")
			spot_p = true;
		if (row.at("m") == 128 && row.at("K") == 3 && f == "0.7e-253")
			spot_f = true;
	}
	if (!expect(spot_p && spot_f, "spot-check cells missing", why))
		return false;
	return expect(dt < 1.0, "tables ran slower than 1 s", why);
}

// ---- criterion 3: functional equivalence under the correct key ----------

bool criterion3(std::string &why)
{
	auto t0 = std::chrono::steady_clock::now();
	const BenchmarkKind kinds[] = {BenchmarkKind::Fir, BenchmarkKind::Elliptic, BenchmarkKind::Lattice,
				       BenchmarkKind::FftLike};
	for (BenchmarkKind kind : kinds)
		for (std::uint64_t seed = 1; seed <= 5; ++seed)
			for (int m : {8, 32}) {
				Pipeline p = build(kind, m, m, seed, 5);
				int bad = testutil::count_mismatches(p.original, {}, p.hardened,
								     p.ks.correct_key, 10000, seed);
				if (!expect(bad == 0, "hardened design diverged under the correct key", why))
					return false;
			}
	return expect(seconds_since(t0) < 120.0, "equivalence suite slower than 2 min", why);
}

// ---- criterion 4: lockout threshold, blackhole, restart survival --------

bool criterion4(std::string &why)
{
	const BenchmarkKind kinds[] = {BenchmarkKind::Fir, BenchmarkKind::Elliptic, BenchmarkKind::Lattice,
				       BenchmarkKind::FftLike};
	const std::string spath = "/tmp/dlk_acceptance_state.json";
	for (int trial = 0; trial < 50; ++trial) {
		int X = std::vector<int>{1, 3, 5}[trial % 3];
		Pipeline p = build(kinds[trial % 4], 6, 6, 200 + trial, X);
		BitVector wrong = p.ks.correct_key;
		wrong[trial % 6] ^= 1;
		InputVector in = testutil::random_inputs(p.hardened, 900 + trial);

		LockoutState st = LockoutState::fresh(X);
		for (int attempt = 1; attempt <= X; ++attempt) {
			PassResult pr = functional_output(p.hardened, wrong, in, st);
			if (!expect(pr.lockout.counter == attempt, "counter did not advance by one", why))
				return false;
			bool full = attempt == X;
			if (!expect(pr.lockout.phase == (full ? LockoutPhase::Full : LockoutPhase::Partial),
				    "phase wrong for attempt count", why))
				return false;
			if (!expect(full ? pr.blackhole : pr.reverted, "pass outcome wrong", why))
				return false;
			// simulated process restart: persist, reload, continue
			save_lockout_state(spath, pr.lockout);
			st = load_lockout_state(spath);
			if (!expect(st.counter == pr.lockout.counter && st.phase == pr.lockout.phase,
				    "state did not survive the restart", why))
				return false;
		}
		PassResult after = functional_output(p.hardened, p.ks.correct_key, in, st);
		if (!expect(after.blackhole, "correct key escaped the blackhole", why))
			return false;
		for (const auto &[name, v] : after.outputs) {
			(void)name;
			if (!expect(v == 0, "blackhole outputs not zeroed", why))
				return false;
		}
	}
	return true;
}

// ---- criterion 5: masked-cell truth table -------------------------------

bool criterion5(std::string &why)
{
	Design original = generate_benchmark(BenchmarkKind::Fir, 4, 9);
	ObfuscationResult res = insert_key_muxes(original, select_points(original, 2, {}), 9);

	for (int mask_bit = 0; mask_bit <= 1; ++mask_bit) {
		// find a mask draw whose bit 0 equals mask_bit
		MaskingResult masked;
		bool found = false;
		for (std::uint64_t s = 1; s <= 64 && !found; ++s) {
			masked = apply_masking(res.design, {}, s);
			found = masked.keyspec.correct_key[0] == mask_bit;
		}
		if (!expect(found, "no mask draw with the required bit", why))
			return false;
		Design h = harden(masked.design, 50, false);
		for (int key_bit = 0; key_bit <= 1; ++key_bit) {
			BitVector key = masked.keyspec.correct_key;
			key[0] = key_bit;
			bool should_select_host = key_bit == mask_bit;
			int mismatches =
			    testutil::count_mismatches(original, {}, masked.design, key, 400, 17);
			if (!expect((mismatches == 0) == should_select_host,
				    "mux selection does not follow key XOR mask", why))
				return false;
			std::vector<int> c = comparators_at_check(h, key);
			if (!expect(c.size() == 2, "no comparator snapshot", why))
				return false;
			if (!expect(c[0] == (key_bit ^ mask_bit), "comparator is not key XOR mask", why))
				return false;
		}
	}
	return true;
}

// ---- criterion 6: stuck-at fault truth table ----------------------------

bool criterion6(std::string &why)
{
	Design original = generate_benchmark(BenchmarkKind::Fir, 8, 19);
	ObfuscationResult res = insert_key_muxes(original, select_points(original, 1, {}), 19);
	Design h = harden(res.design, 5, true);
	const std::string pid = h.points[0].point_id;
	BitVector wrong = res.keyspec.correct_key;
	wrong[0] ^= 1;
	InputVector in = {{"x", 77}};

	auto run = [&](StuckAt polarity, const BitVector &key) {
		SimOptions opts;
		opts.comparator_faults[pid] = polarity;
		return functional_output(h, key, in, LockoutState::fresh(5), opts);
	};

	// (fault, expected comparator) -> (alarm, counter action)
	PassResult r1 = run(StuckAt::Zero, res.keyspec.correct_key);
	if (!expect(!r1.edu_alarm && r1.lockout.counter == 0, "SAF-0 with expected 0 misbehaved", why))
		return false;
	PassResult r2 = run(StuckAt::Zero, wrong);
	if (!expect(r2.edu_alarm && r2.lockout.counter == 0, "SAF-0 bypass not detected", why))
		return false;
	PassResult r3 = run(StuckAt::One, res.keyspec.correct_key);
	if (!expect(r3.edu_alarm && r3.lockout.counter == 1, "SAF-1 false-positive not detected", why))
		return false;
	PassResult r4 = run(StuckAt::One, wrong);
	return expect(!r4.edu_alarm && r4.lockout.counter == 1, "SAF-1 with expected 1 misbehaved", why);
}

// ---- criterion 7: power-analysis efficacy and masking defense -----------

bool criterion7(std::string &why)
{
	auto t0 = std::chrono::steady_clock::now();
	Design base = generate_dpa_testbed(8, 8, 48, 3);
	std::vector<std::string> tap_ports;
	for (int j = 0; j < 8; ++j)
		tap_ports.push_back("x" + std::to_string(j));

	int recovered = 0;
	int masked_matches = 0, masked_bits = 0;
	bool masked_corr_ok = true;
	std::map<int, std::vector<long long>> sweep_mtd;

	for (std::uint64_t seed = 1; seed <= 20; ++seed) {
		ObfuscationResult res =
		    insert_key_muxes(base, select_points(base, 8, {}), seed, DecoyPolicy::PreferConstant);
		Design unmasked = harden(res.design, 5, false);

		DpaOptions opts;
		opts.max_traces = 5000;
		opts.noise_sigma = 1.0;
		opts.seed = 4000 + seed;
		DpaOutcome plain = dpa_attack(unmasked, res.keyspec.correct_key, opts);
		if (plain.report.success && plain.recovered_key == res.keyspec.correct_key &&
		    plain.report.mtd_traces <= 5000)
			++recovered;

		MaskingResult mr = apply_masking(res.design, {}, seed ^ 0x5a5a);
		Design maskedd = harden(mr.design, 5, false);
		DpaOptions mopts = opts;
		mopts.max_traces = 600;
		DpaOutcome hid = dpa_attack(maskedd, mr.keyspec.correct_key, mopts);
		for (int bit = 0; bit < 8; ++bit) {
			if (std::abs(hid.correlation[bit]) >= 0.1)
				masked_corr_ok = false;
			masked_matches += hid.recovered_key[bit] == mr.keyspec.correct_key[bit] ? 1 : 0;
			++masked_bits;
		}

		for (int p : {2, 4, 8}) {
			DpaOptions sopts = opts;
			sopts.switching_bits = p;
			sopts.switching_ports = tap_ports;
			DpaOutcome sw = dpa_attack(unmasked, res.keyspec.correct_key, sopts);
			if (sw.report.success)
				sweep_mtd[p].push_back(sw.report.mtd_traces);
		}
	}

	if (!expect(recovered >= 18, "unmasked recovery below 18 of 20 seeds", why))
		return false;
	if (!expect(masked_corr_ok, "masked per-bit correlation reached 0.1", why))
		return false;
	double chance_p = binomial_two_sided_p(masked_matches, masked_bits, 0.5);
	if (!expect(chance_p > 0.01, "masked recovery deviates from chance", why))
		return false;
	for (int p : {2, 4, 8})
		if (!expect(sweep_mtd[p].size() >= 15, "too few successful sweep runs", why))
			return false;
	double m2 = median(sweep_mtd[2]), m4 = median(sweep_mtd[4]), m8 = median(sweep_mtd[8]);
	if (!expect(m2 > m4 && m4 > m8, "median trace count not decreasing in switching bits", why))
		return false;
	return expect(seconds_since(t0) < 600.0, "power-analysis suite slower than 10 min", why);
}

// ---- criterion 8: comparator fault bypass -------------------------------

bool criterion8(std::string &why)
{
	Pipeline p = build(BenchmarkKind::Fir, 8, 6, 7, 5);
	GoldenSet golden = make_golden(p.original, 5);
	FaultSpec fault;
	fault.polarity = StuckAt::Zero;

	KeyStream exhaustive;
	exhaustive.width = 6;
	AttackReport plain = fault_attack(p.hardened, fault, exhaustive, golden);
	if (!expect(plain.success && !plain.locked_out, "SAF-0 bypass failed", why))
		return false;
	if (!expect(plain.recovered_key && *plain.recovered_key == p.ks.correct_key,
		    "bypass recovered a wrong key", why))
		return false;

	// push the correct key past the threshold to prove the counter is inert
	KeyStream late;
	late.width = 6;
	for (int i = 0; i < 10; ++i) {
		BitVector k = p.ks.correct_key;
		k[i % 6] ^= 1;
		late.explicit_keys.push_back(k);
	}
	late.explicit_keys.push_back(p.ks.correct_key);
	AttackReport deep = fault_attack(p.hardened, fault, late, golden);
	if (!expect(deep.success && !deep.locked_out && deep.attempts_used == 11,
		    "bypass did not survive past the threshold", why))
		return false;

	Pipeline pe = build(BenchmarkKind::Fir, 8, 6, 7, 5, /*edu=*/true);
	AttackReport guarded = fault_attack(pe.hardened, fault, exhaustive, golden);
	if (!expect(guarded.edu_alarm && !guarded.success, "detection unit did not abort the attack", why))
		return false;

	return expect(fault_trials(8, 2, 5) == 32, "trial bound arithmetic wrong", why);
}

// ---- criterion 9: the key is never stored in the design -----------------

bool criterion9(std::string &why)
{
	for (std::uint64_t seed = 1; seed <= 100; ++seed) {
		Pipeline p = build(BenchmarkKind::Fir, 32, 32, seed, 5, seed % 2 == 0);
		std::string text = serialize_design(p.hardened);
		if (!expect(text.find(bits_to_hex(p.ks.correct_key)) == std::string::npos,
			    "serialized design contains the key as hex", why))
			return false;
		if (!expect(text.find(bits_to_binary(p.ks.correct_key)) == std::string::npos,
			    "serialized design contains the key as bits", why))
			return false;
		if (!expect(text.find("correct_key") == std::string::npos,
			    "serialized design carries a key field", why))
			return false;
	}
	return true;
}

// ---- criterion 10: structural overhead ----------------------------------

bool criterion10(std::string &why)
{
	size_t prev_nets = 0;
	for (int m : {2, 4, 6, 8}) {
		for (bool edu : {false, true}) {
			Pipeline p = build(BenchmarkKind::Fir, 8, m, 41, 5, edu);
			OverheadSummary o = structural_overhead(p.original, p.hardened);
			if (!expect(o.key_muxes == m, "mux count != m", why))
				return false;
			if (!expect(o.comparators == m, "comparator count != m", why))
				return false;
			if (!expect(o.shadow_comparators == (edu ? m : 0), "shadow comparator count wrong", why))
				return false;
			if (!expect(o.counters == 1 && o.checker_fsms == 1, "expected 1 counter and 1 checker",
				    why))
				return false;
			if (!expect(o.added_states == 1, "expected exactly 1 added controller state", why))
				return false;
			if (!edu) {
				size_t nets = p.hardened.datapath.nets.size();
				if (!expect(nets > prev_nets, "net count not strictly increasing with m", why))
					return false;
				prev_nets = nets;
			}
		}
	}
	return true;
}

} // namespace

int main(int argc, char **argv)
{
	if (argc < 2) {
		std::fprintf(stderr, "usage: %s <cli-binary>\n", argv[0]);
		return 2;
	}
	g_cli = argv[1];

	struct Criterion {
		const char *desc;
		bool (*fn)(std::string &);
	};
	const Criterion criteria[] = {
	    {"trace-count table reproduced with the single flagged cell", criterion1},
	    {"key-probability table reproduced cell for cell", criterion2},
	    {"hardened designs match the originals under the correct key", criterion3},
	    {"lockout engages at the threshold and survives restarts", criterion4},
	    {"masked cells follow the key-XOR-mask truth table", criterion5},
	    {"stuck-at faults follow the detection truth table", criterion6},
	    {"power analysis recovers unmasked keys and masking defeats it", criterion7},
	    {"comparator stuck-at-0 bypasses the counter unless detected", criterion8},
	    {"the correct key never appears in a serialized design", criterion9},
	    {"structural overhead is exactly as budgeted", criterion10},
	};

	int fails = 0;
	int idx = 0;
	for (const Criterion &c : criteria) {
		++idx;
		std::string why;
		bool ok = false;
		auto t0 = std::chrono::steady_clock::now();
		try {
			ok = c.fn(why);
		} catch (const std::exception &e) {
			why = e.what();
		}
		double dt = seconds_since(t0);
		if (ok) {
			std::printf("[PASS] criterion %d: %s (%.1fs)\n", idx, c.desc, dt);
		} else {
			std::printf("[FAIL] criterion %d: %s (%.1fs) -- %s\n", idx, c.desc, dt,
				    why.empty() ? "unspecified" : why.c_str());
			++fails;
		}
		std::fflush(stdout);
	}
	return fails;
}
