#include "dlockout/benchmark.hpp"

#include <stdexcept>

#include "dlockout/bits.hpp"
#include "dlockout/validate.hpp"

namespace dlockout {

std::optional<BenchmarkKind> benchmark_kind_from_string(const std::string &s)
{
	if (s == "fir")
		return BenchmarkKind::Fir;
	if (s == "elliptic")
		return BenchmarkKind::Elliptic;
	if (s == "lattice")
		return BenchmarkKind::Lattice;
	if (s == "fft-like" || s == "fft")
		return BenchmarkKind::FftLike;
	return std::nullopt;
}

const char *to_string(BenchmarkKind k)
{
	switch (k) {
	case BenchmarkKind::Fir:
		return "fir";
	case BenchmarkKind::Elliptic:
		return "elliptic";
	case BenchmarkKind::Lattice:
		return "lattice";
	case BenchmarkKind::FftLike:
		return "fft-like";
	}
	return "?";
}

namespace {

struct Builder {
	Design d;
	std::uint64_t rng_state;
	std::string tag;

	explicit Builder(std::uint64_t seed) : rng_state(mix64(seed ^ 0x5b1c00d5ull))
	{
		tag = "t" + std::to_string(mix64(seed) % 1000);
	}

	std::uint64_t next()
	{
		rng_state = mix64(rng_state);
		return rng_state;
	}

	std::string nid(const std::string &base) { return tag + "_" + base; }

	std::string add_net(const std::string &base, int width, const std::string &driver)
	{
		std::string id = nid("n_" + base);
		d.datapath.nets.push_back({id, width, driver});
		return id;
	}

	// Creates the node and its output net, returns the output net id.
	std::string add_fu(const std::string &base, OpKind op, const std::string &a, const std::string &b, int width)
	{
		Node n;
		n.id = nid(base);
		n.kind = NodeKind::FunctionalUnit;
		n.op = op;
		n.delay_ns = default_op_delay_ns(op);
		n.inputs = {a, b};
		n.output = add_net(base, width, "node:" + n.id);
		d.datapath.nodes.push_back(n);
		return n.output;
	}

	std::string add_reg(const std::string &base, const std::string &in, int width)
	{
		Node n;
		n.id = nid(base);
		n.kind = NodeKind::Register;
		n.width = width;
		n.inputs = {in};
		n.output = add_net(base, width, "node:" + n.id);
		d.datapath.nodes.push_back(n);
		return n.output;
	}

	std::string add_const(const std::string &base, std::uint64_t value, int width)
	{
		Node n;
		n.id = nid(base);
		n.kind = NodeKind::Constant;
		n.width = width;
		n.value = value & width_mask(width);
		if (n.value < 2)
			n.value = 2; // keep multiplications non-degenerate
		n.inputs = {};
		n.output = add_net(base, width, "node:" + n.id);
		d.datapath.nodes.push_back(n);
		return n.output;
	}

	// Pairwise XOR reduction; depth log2 of the operand count.
	std::string xor_reduce(std::vector<std::string> nets, const std::string &base, int width)
	{
		int level = 0;
		while (nets.size() > 1) {
			std::vector<std::string> next;
			for (size_t i = 0; i + 1 < nets.size(); i += 2)
				next.push_back(add_fu(base + "_" + std::to_string(level) + "_" + std::to_string(i / 2),
						      OpKind::Xor, nets[i], nets[i + 1], width));
			if (nets.size() % 2)
				next.push_back(nets.back());
			nets = std::move(next);
			++level;
		}
		return nets[0];
	}

	std::string reg_id(const std::string &base) { return nid(base); }
};

} // namespace

Design generate_benchmark(BenchmarkKind kind, int size, std::uint64_t seed, const BenchmarkOptions &opts)
{
	if (size < 4)
		throw std::invalid_argument("benchmark size must be >= 4");
	if (opts.sched_states < 4)
		throw std::invalid_argument("schedule states must be >= 4");
	int q = opts.width;
	if (q != 8 && q != 16 && q != 32 && q != 64)
		throw std::invalid_argument("benchmark width must be one of 8, 16, 32, 64");

	Builder b(seed ^ (std::uint64_t)kind * 0x9d5ull ^ (std::uint64_t)size * 0x51ull);
	Design &d = b.d;
	d.name = std::string(to_string(kind)) + "_" + std::to_string(size) + "_" + std::to_string(seed);
	d.clock_period_ns = 10.0;
	d.inputs.push_back({"x", q});

	std::string x = b.add_net("x", q, "input:x");

	// staging bank: one register per tap, loaded every cycle with a
	// distinct mix of the input so all taps carry data after one cycle
	std::vector<std::string> dline;
	for (int j = 0; j < size; ++j) {
		std::string c = b.add_const("dc" + std::to_string(j), b.next(), q);
		std::string s = b.add_fu("ds" + std::to_string(j), j % 2 ? OpKind::Add : OpKind::Xor, x, c, q);
		dline.push_back(b.add_reg("d" + std::to_string(j), s, q));
	}

	// per-tap combinational work; tap output nets are the intended
	// obfuscation candidates (positive slack by construction)
	std::vector<std::string> taps;
	switch (kind) {
	case BenchmarkKind::Fir:
		for (int j = 0; j < size; ++j) {
			std::string k = b.add_const("k" + std::to_string(j), b.next(), q);
			taps.push_back(b.add_fu("p" + std::to_string(j), OpKind::Mul, dline[j], k, q));
		}
		break;
	case BenchmarkKind::Elliptic:
		for (int j = 0; j < size; ++j) {
			std::string k = b.add_const("k" + std::to_string(j), b.next(), q);
			std::string k2 = b.add_const("g" + std::to_string(j), b.next(), q);
			std::string e = b.add_fu("e" + std::to_string(j), OpKind::Add, dline[j], k, q);
			taps.push_back(b.add_fu("p" + std::to_string(j), OpKind::Mul, e, k2, q));
		}
		break;
	case BenchmarkKind::Lattice:
		for (int j = 0; j < size; ++j) {
			std::string k = b.add_const("k" + std::to_string(j), b.next(), q);
			std::string w = b.add_fu("w" + std::to_string(j), OpKind::Xor,
						 dline[j], dline[(j + 1) % size], q);
			taps.push_back(b.add_fu("p" + std::to_string(j), OpKind::Mul, w, k, q));
		}
		break;
	case BenchmarkKind::FftLike:
		for (int j = 0; j < size; ++j) {
			std::string other = dline[(j + size / 2) % size];
			std::string u = b.add_fu("u" + std::to_string(j), j % 2 ? OpKind::Sub : OpKind::Add,
						 dline[j], other, q);
			std::string k = b.add_const("k" + std::to_string(j), b.next(), q);
			taps.push_back(b.add_fu("p" + std::to_string(j), OpKind::Mul, u, k, q));
		}
		break;
	}

	// bounded-depth reduction: taps fold into per-group registers (group
	// size 8 keeps the combinational depth independent of `size`), then a
	// final tree folds the group registers
	std::vector<std::string> groups;
	for (size_t g = 0; g * 8 < taps.size(); ++g) {
		std::vector<std::string> chunk(taps.begin() + g * 8,
					       taps.begin() + std::min(taps.size(), (g + 1) * 8));
		std::string folded = b.xor_reduce(chunk, "t" + std::to_string(g), q);
		groups.push_back(b.add_reg("a" + std::to_string(g), folded, q));
	}

	// clock-limited critical chain: mul + mul + add = 10 ns
	std::string cc1 = b.add_reg("cc1", x, q);
	std::string kc1 = b.add_const("kc1", b.next(), q);
	std::string kc2 = b.add_const("kc2", b.next(), q);
	std::string m1 = b.add_fu("cm1", OpKind::Mul, cc1, kc1, q);
	std::string m2 = b.add_fu("cm2", OpKind::Mul, m1, kc2, q);
	std::string kc3 = b.add_const("kc3", b.next(), q);
	std::string m3 = b.add_fu("cm3", OpKind::Add, m2, kc3, q);
	std::string cc2 = b.add_reg("cc2", m3, q);

	groups.push_back(cc2);
	std::string xo = b.xor_reduce(groups, "xo", q);
	std::string y = b.add_reg("y", xo, q);
	d.outputs.push_back({"y", q, y});

	// controller: S0 (reset) then S1..SN schedule loop
	int N = opts.sched_states;
	for (int s = 0; s <= N; ++s) {
		FsmState st;
		st.name = "S" + std::to_string(s);
		for (const auto &node : d.datapath.nodes)
			if (node.kind == NodeKind::Register)
				st.control_word.reg_en[node.id] = node.id == b.reg_id("y") ? s == N : true;
		d.controller.states.push_back(std::move(st));
	}
	d.controller.reset_state = "S0";
	for (int s = 0; s < N; ++s)
		d.controller.transitions.push_back(
		    {"S" + std::to_string(s), kCondAlways, "S" + std::to_string(s + 1)});
	d.controller.transitions.push_back({"S" + std::to_string(N), kCondAlways, "S0"});

	ValidationReport report = validate_design(d);
	if (!report.ok())
		throw std::logic_error("generated benchmark failed validation: " + report.entries.front().message);
	return d;
}

Design generate_dpa_testbed(int taps, int width, int ballast, std::uint64_t seed)
{
	if (taps < 2)
		throw std::invalid_argument("testbed needs at least 2 taps");
	if (ballast < 0)
		throw std::invalid_argument("ballast count must be >= 0");
	int q = width;
	if (q != 8 && q != 16 && q != 32 && q != 64)
		throw std::invalid_argument("testbed width must be one of 8, 16, 32, 64");

	Builder b(seed ^ 0xd9a7e57ull);
	Design &d = b.d;
	d.name = "dpa_testbed_" + std::to_string(taps) + "_" + std::to_string(seed);
	d.clock_period_ns = 10.0;

	// one independent input port per tap, so the per-tap activity streams
	// are mutually uncorrelated
	std::vector<std::string> dregs;
	for (int j = 0; j < taps; ++j) {
		std::string port = "x" + std::to_string(j);
		d.inputs.push_back({port, q});
		std::string x = b.add_net(port, q, "input:" + port);
		std::string c = b.add_const("c" + std::to_string(j), b.next(), q);
		// "a" prefix: ties on slack resolve by net id, keeping the tap
		// mixers first in line for key insertion
		std::string s = b.add_fu("amix" + std::to_string(j), OpKind::Xor, x, c, q);
		dregs.push_back(b.add_reg("d" + std::to_string(j), s, q));
	}
	std::string folded = b.xor_reduce(dregs, "t", q);
	std::string y = b.add_reg("y", folded, q);
	d.outputs.push_back({"y", q, y});

	// ballast bank on its own wide port: background switching power that
	// stays put no matter how the tap ports are driven
	if (ballast > 0) {
		d.inputs.push_back({"z", 16});
		std::string z = b.add_net("z", 16, "input:z");
		std::vector<std::string> bank;
		for (int i = 0; i < ballast; ++i) {
			std::string c = b.add_const("zc" + std::to_string(i), b.next(), 16);
			std::string s = b.add_fu("zm" + std::to_string(i), OpKind::Mul, z, c, 16);
			bank.push_back(b.add_reg("zr" + std::to_string(i), s, 16));
		}
		std::string zf = b.xor_reduce(bank, "zf", 16);
		std::string y2 = b.add_reg("y2", zf, 16);
		d.outputs.push_back({"y2", 16, y2});
	}

	int N = 4;
	for (int s = 0; s <= N; ++s) {
		FsmState st;
		st.name = "S" + std::to_string(s);
		for (const auto &node : d.datapath.nodes)
			if (node.kind == NodeKind::Register) {
				bool latch_out = node.id == b.reg_id("y") || node.id == b.reg_id("y2");
				st.control_word.reg_en[node.id] = latch_out ? s == N : true;
			}
		d.controller.states.push_back(std::move(st));
	}
	d.controller.reset_state = "S0";
	for (int s = 0; s < N; ++s)
		d.controller.transitions.push_back(
		    {"S" + std::to_string(s), kCondAlways, "S" + std::to_string(s + 1)});
	d.controller.transitions.push_back({"S" + std::to_string(N), kCondAlways, "S0"});

	ValidationReport report = validate_design(d);
	if (!report.ok())
		throw std::logic_error("generated testbed failed validation: " + report.entries.front().message);
	return d;
}

} // namespace dlockout
