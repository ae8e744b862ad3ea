#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "dlockout/benchmark.hpp"
#include "dlockout/json_io.hpp"
#include "dlockout/obfuscate.hpp"
#include "dlockout/timing.hpp"
#include "dlockout/validate.hpp"
#include "test_util.hpp"

using namespace dlockout;
using testutil::Tiny;

namespace {

Design minimal_design()
{
	Tiny t("minimal");
	std::string a = t.input("a", 4);
	std::string r = t.reg("r", a, 4);
	t.output("y", r, 4);
	return t.finish(1);
}

// Random layered combinational DAG wrapped into a valid design; every
// operation output eventually reaches a register so nothing dangles.
Design random_dag(std::uint64_t seed, int max_nodes)
{
	Tiny t("dag" + std::to_string(seed));
	std::uint64_t s = seed;
	auto rnd = [&]() { return s = mix64(s); };
	int n_inputs = 1 + (int)(rnd() % 3);
	std::vector<std::string> nets;
	for (int i = 0; i < n_inputs; ++i)
		nets.push_back(t.input("x" + std::to_string(i), 8));
	int n_fu = 3 + (int)(rnd() % (std::uint64_t)(max_nodes - 2));
	std::set<std::string> used;
	for (int i = 0; i < n_fu; ++i) {
		std::string a = nets[rnd() % nets.size()];
		std::string b = nets[rnd() % nets.size()];
		double delay = 1.0 + (double)(rnd() % 3); // 1..3 ns
		std::string o = t.fu("f" + std::to_string(i), OpKind::Add, a, b, 8, delay);
		used.insert(a);
		used.insert(b);
		nets.push_back(o);
	}
	// registers consume everything not already consumed
	int r = 0;
	std::vector<std::string> regs;
	for (const auto &net : nets)
		if (!used.count(net))
			regs.push_back(t.reg("r" + std::to_string(r++), net, 8));
	for (size_t i = 0; i < regs.size(); ++i)
		t.output("y" + std::to_string(i), regs[i], 8);
	t.d.clock_period_ns = 100.0; // generous: slack stays nonnegative
	return t.finish(2);
}

} // namespace

TEST_CASE("minimal design parses and round-trips")
{
	Design d = minimal_design();
	std::string text = serialize_design(d);
	Design p = parse_design(text);
	CHECK(p.key_width == 0);
	CHECK(p.name == "minimal");
	CHECK(serialize_design(p) == text);
	// canonical-form fixpoint
	CHECK(serialize_design(parse_design(serialize_design(p))) == text);
}

TEST_CASE("benchmarks and the power testbed round-trip through serialization")
{
	for (auto kind : {BenchmarkKind::Fir, BenchmarkKind::Elliptic, BenchmarkKind::Lattice, BenchmarkKind::FftLike}) {
		Design d = generate_benchmark(kind, 8, 11);
		std::string text = serialize_design(d);
		CHECK(serialize_design(parse_design(text)) == text);
	}
	Design tb = generate_dpa_testbed(8, 8, 12, 5);
	CHECK(serialize_design(parse_design(serialize_design(tb))) == serialize_design(tb));
}

TEST_CASE("malformed JSON raises a syntax error")
{
	CHECK_THROWS_AS(parse_design("{ definitely not json"), SyntaxError);
	CHECK_THROWS_AS(parse_design(""), SyntaxError);
}

TEST_CASE("missing or wrong ir_version is rejected")
{
	CHECK_THROWS_AS(parse_design("{}"), SemanticError);
}

TEST_CASE("a net with two drivers is a semantic error naming the net")
{
	Tiny t("twodrivers");
	std::string a = t.input("a", 4);
	t.fu("f1", OpKind::Add, a, a, 4);
	// second node declaring the same output net
	Node n;
	n.id = "f2";
	n.kind = NodeKind::FunctionalUnit;
	n.op = OpKind::Xor;
	n.delay_ns = 1.0;
	n.inputs = {a, a};
	n.output = "n_f1";
	t.d.datapath.nodes.push_back(n);
	std::string r = t.reg("r", "n_f1", 4);
	t.output("y", r, 4);
	Design d = t.finish(1);

	ValidationReport rep = validate_design(d);
	CHECK(rep.has("multiple-drivers"));
	CHECK_THROWS_WITH_AS(parse_design(serialize_design(d)), doctest::Contains("multiple drivers"), SemanticError);
}

TEST_CASE("valid designs produce an empty validation report")
{
	CHECK(validate_design(minimal_design()).ok());
	CHECK(validate_design(generate_benchmark(BenchmarkKind::Elliptic, 16, 7)).ok());
}

TEST_CASE("combinational cycles are reported with the nets on the cycle")
{
	Tiny t("cyclic");
	std::string a = t.input("a", 4);
	// f1 and f2 feed each other
	t.d.datapath.nets.push_back({"n_f2", 4, "node:f2"});
	std::string f1 = t.fu("f1", OpKind::Add, a, "n_f2", 4);
	Node n;
	n.id = "f2";
	n.kind = NodeKind::FunctionalUnit;
	n.op = OpKind::Xor;
	n.delay_ns = 1.0;
	n.inputs = {f1, a};
	n.output = "n_f2";
	t.d.datapath.nodes.push_back(n);
	std::string r = t.reg("r", f1, 4);
	t.output("y", r, 4);
	Design d = t.finish(1);

	ValidationReport rep = validate_design(d);
	REQUIRE(rep.has("comb-cycle"));
	for (const auto &e : rep.entries)
		if (e.code == "comb-cycle") {
			CHECK(e.message.find("n_f1") != std::string::npos);
			CHECK(e.message.find("n_f2") != std::string::npos);
		}
	CHECK(!find_combinational_cycle(d.datapath).empty());
	CHECK_THROWS_AS(combinational_topo_order(d.datapath), CyclicGraphError);
}

TEST_CASE("a path longer than the clock period is a timing violation")
{
	// brute-force check on a 5-node chain: 4 + 4 + 4 = 12 ns > 10 ns
	Tiny t("slow");
	std::string a = t.input("a", 8);
	std::string f1 = t.fu("f1", OpKind::Mul, a, a, 8); // 4 ns
	std::string f2 = t.fu("f2", OpKind::Mul, f1, a, 8);
	std::string f3 = t.fu("f3", OpKind::Mul, f2, a, 8);
	std::string r = t.reg("r", f3, 8);
	t.output("y", r, 8);
	Design d = t.finish(1);

	ValidationReport rep = validate_design(d);
	CHECK(rep.has("timing"));
	CHECK(compute_slack(d).critical_path_ns == doctest::Approx(12.0));
}

TEST_CASE("dangling nets are flagged")
{
	Tiny t("dangle");
	std::string a = t.input("a", 4);
	std::string f = t.fu("f1", OpKind::Add, a, a, 4); // f's output goes nowhere
	std::string r = t.reg("r", a, 4);
	t.output("y", r, 4);
	Design d = t.finish(1);
	(void)f;
	ValidationReport rep = validate_design(d);
	CHECK(rep.has("dangling-net"));
}

TEST_CASE("slack: chain of two 3 ns units under a 10 ns clock")
{
	Tiny t("chain");
	std::string a = t.input("a", 8);
	std::string f1 = t.fu("f1", OpKind::Add, a, a, 8, 3.0);
	std::string f2 = t.fu("f2", OpKind::Add, f1, a, 8, 3.0);
	std::string r = t.reg("r", f2, 8);
	t.output("y", r, 8);
	Design d = t.finish(1);

	SlackMap sm = compute_slack(d);
	// every net lies on the single 6 ns path
	for (const auto &net : d.datapath.nets)
		if (net.id != "n_r")
			CHECK(sm.slack_ns.at(net.id) == doctest::Approx(4.0));
}

TEST_CASE("slack: a unit as long as the clock leaves zero slack")
{
	Tiny t("exact");
	std::string a = t.input("a", 8);
	std::string f = t.fu("f1", OpKind::Add, a, a, 8, 10.0);
	std::string r = t.reg("r", f, 8);
	t.output("y", r, 8);
	Design d = t.finish(1);
	SlackMap sm = compute_slack(d);
	CHECK(sm.slack_ns.at("n_f1") == doctest::Approx(0.0));
	CHECK(sm.slack_ns.at("n_a") == doctest::Approx(0.0));
	CHECK(sm.critical_path_ns == doctest::Approx(10.0));
}

TEST_CASE("slack: short parallel branch has 6 ns more slack than the long one")
{
	Tiny t("branches");
	std::string a = t.input("a", 8);
	std::string s = t.fu("short", OpKind::Add, a, a, 8, 2.0);
	std::string l = t.fu("long", OpKind::Add, a, a, 8, 8.0);
	std::string j = t.fu("join", OpKind::Xor, s, l, 8, 1.0);
	std::string r = t.reg("r", j, 8);
	t.output("y", r, 8);
	Design d = t.finish(1);

	SlackMap sm = compute_slack(d);
	CHECK(sm.slack_ns.at("n_short") - sm.slack_ns.at("n_long") == doctest::Approx(6.0));
	CHECK(sm.slack_ns.at("n_long") == doctest::Approx(1.0));
	CHECK(sm.slack_ns.at("n_short") == doctest::Approx(7.0));
}

TEST_CASE("compute_slack matches an exhaustive path-enumeration oracle on random DAGs")
{
	for (std::uint64_t seed = 1; seed <= 50; ++seed) {
		Design d = random_dag(seed, 9); // <= 12 combinational nodes
		REQUIRE(validate_design(d).ok());
		SlackMap sm = compute_slack(d);
		auto oracle = testutil::slack_oracle(d);
		for (const auto &[net, slack] : oracle)
			CHECK(sm.slack_ns.at(net) == doctest::Approx(slack));
	}
}

TEST_CASE("benchmark generation is deterministic in (kind, size, seed)")
{
	Design a = generate_benchmark(BenchmarkKind::Fir, 8, 1);
	Design b = generate_benchmark(BenchmarkKind::Fir, 8, 1);
	CHECK(serialize_design(a) == serialize_design(b));
	Design c = generate_benchmark(BenchmarkKind::Fir, 8, 2);
	CHECK(serialize_design(a) != serialize_design(c));
	CHECK(validate_design(c).ok());
}

TEST_CASE("generated benchmarks validate and offer enough insertion sites")
{
	for (int i = 0; i < 100; ++i) {
		std::uint64_t s = mix64(0xbe9c0 + i);
		auto kind = (BenchmarkKind)(s % 4);
		int size = 4 + (int)(mix64(s) % 17); // 4..20
		Design d = generate_benchmark(kind, size, s);
		CAPTURE((int)kind);
		CAPTURE(size);
		REQUIRE(validate_design(d).ok());
		// at least `size` mutually independent slack-positive sites
		auto nets = select_points(d, size, {SelectionPolicyKind::MaxSlack, 0});
		CHECK((int)nets.size() == size);
	}
	CHECK_THROWS(generate_benchmark(BenchmarkKind::Fir, 3, 1));
}

TEST_CASE("power testbed validates, is deterministic and has independent tap ports")
{
	Design a = generate_dpa_testbed(8, 8, 48, 3);
	Design b = generate_dpa_testbed(8, 8, 48, 3);
	CHECK(serialize_design(a) == serialize_design(b));
	CHECK(validate_design(a).ok());
	int tap_ports = 0;
	for (const auto &p : a.inputs)
		if (p.name.rfind("x", 0) == 0)
			++tap_ports;
	CHECK(tap_ports == 8);
	auto nets = select_points(a, 8, {SelectionPolicyKind::MaxSlack, 0});
	CHECK(nets.size() == 8);
}
