// Process-level tests for the command-line tool. The binary path arrives as
// argv[1]; every test works inside its own temporary directory and points
// DLOCKOUT_STATE_DIR there so lockout state never leaks between cases.
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

std::string g_cli;

struct RunResult {
	int exit_code;
	std::string output; // stdout + stderr interleaved
};

std::string shell_quote(const std::string &s)
{
	return "'" + s + "'";
}

RunResult run_in(const std::string &dir, const std::string &args)
{
	std::string cmd = "cd " + shell_quote(dir) + " && DLOCKOUT_STATE_DIR=" + shell_quote(dir) + " " +
			  shell_quote(g_cli) + " " + args + " 2>&1";
	FILE *p = popen(cmd.c_str(), "r");
	REQUIRE(p != nullptr);
	std::string out;
	char buf[4096];
	size_t n;
	while ((n = fread(buf, 1, sizeof(buf), p)) > 0)
		out.append(buf, n);
	int st = pclose(p);
	return {WIFEXITED(st) ? WEXITSTATUS(st) : 128, out};
}

std::string fresh_dir()
{
	char tmpl[] = "/tmp/dlk_cli_XXXXXX";
	char *d = mkdtemp(tmpl);
	REQUIRE(d != nullptr);
	return d;
}

std::string slurp(const std::string &path)
{
	std::ifstream f(path);
	REQUIRE(f.good());
	std::stringstream ss;
	ss << f.rdbuf();
	return ss.str();
}

void spit(const std::string &path, const std::string &text)
{
	std::ofstream f(path, std::ios::trunc);
	f << text;
}

// generate -> obfuscate -> lockout; returns the correct key in hex
std::string build_pipeline(const std::string &dir, int X, int seed = 7, int size = 6, int m = 6)
{
	RunResult g = run_in(dir, "generate --kind fir --size " + std::to_string(size) +
				      " --seed 7 -o orig.json");
	REQUIRE(g.exit_code == 0);
	RunResult o = run_in(dir, "obfuscate orig.json -m " + std::to_string(m) + " --seed " +
				      std::to_string(seed) + " -o obf.json --keyspec ks.json");
	REQUIRE(o.exit_code == 0);
	RunResult l = run_in(dir, "lockout obf.json -X " + std::to_string(X) + " -o hard.json");
	REQUIRE(l.exit_code == 0);
	nlohmann::json ks = nlohmann::json::parse(slurp(dir + "/ks.json"));
	return ks.at("correct_key").get<std::string>();
}

std::string state_file(const std::string &dir)
{
	nlohmann::json d = nlohmann::json::parse(slurp(dir + "/hard.json"));
	return dir + "/" + d.at("name").get<std::string>() + ".lockout.json";
}

} // namespace

TEST_CASE("generate is deterministic per seed and varies across seeds")
{
	std::string dir = fresh_dir();
	CHECK(run_in(dir, "generate --kind elliptic --size 8 --seed 3 -o a.json").exit_code == 0);
	CHECK(run_in(dir, "generate --kind elliptic --size 8 --seed 3 -o b.json").exit_code == 0);
	CHECK(run_in(dir, "generate --kind elliptic --size 8 --seed 4 -o c.json").exit_code == 0);
	CHECK(slurp(dir + "/a.json") == slurp(dir + "/b.json"));
	CHECK(slurp(dir + "/a.json") != slurp(dir + "/c.json"));
	CHECK(run_in(dir, "generate --kind nonsense -o d.json").exit_code != 0);
}

TEST_CASE("the hardened pipeline with the correct key matches the original outputs")
{
	std::string dir = fresh_dir();
	std::string key = build_pipeline(dir, 5);
	spit(dir + "/in.json", "[{\"x\": 123}]");
	RunResult ref = run_in(dir, "simulate orig.json --inputs in.json");
	RunResult got = run_in(dir, "simulate hard.json --key " + key + " --inputs in.json");
	REQUIRE(ref.exit_code == 0);
	REQUIRE(got.exit_code == 0);
	auto outputs_of = [](const std::string &text) {
		size_t p = text.find("outputs:");
		REQUIRE(p != std::string::npos);
		return text.substr(p);
	};
	CHECK(outputs_of(got.output) == outputs_of(ref.output));
	CHECK(got.output.find("phase: FREE") != std::string::npos);
}

TEST_CASE("wrong keys advance the persistent counter to FULL and trap even the correct key")
{
	std::string dir = fresh_dir();
	std::string key = build_pipeline(dir, 5);
	// flip one hex digit to make a wrong key
	std::string wrong = key;
	wrong[0] = wrong[0] == '0' ? '1' : '0';
	for (int attempt = 1; attempt <= 5; ++attempt) {
		RunResult r = run_in(dir, "simulate hard.json --key " + wrong);
		CHECK(r.exit_code == 0);
		if (attempt < 5)
			CHECK(r.output.find("reverted") != std::string::npos);
		else
			CHECK(r.output.find("blackhole") != std::string::npos);
	}
	nlohmann::json st = nlohmann::json::parse(slurp(state_file(dir)));
	CHECK(st.at("counter") == 5);
	CHECK(st.at("phase") == "FULL");
	// the device is gone: the correct key now falls into the blackhole
	RunResult after = run_in(dir, "simulate hard.json --key " + key);
	CHECK(after.exit_code == 0);
	CHECK(after.output.find("blackhole") != std::string::npos);
	CHECK(after.output.find("phase: FULL") != std::string::npos);
}

TEST_CASE("a missing or corrupt state file fails closed; reset-state recovers")
{
	std::string dir = fresh_dir();
	std::string key = build_pipeline(dir, 5);
	std::string sf = state_file(dir);

	REQUIRE(remove(sf.c_str()) == 0);
	RunResult missing = run_in(dir, "simulate hard.json --key " + key);
	CHECK(missing.exit_code != 0);
	CHECK(missing.output.find("missing") != std::string::npos);

	spit(sf, "{ not json");
	RunResult corrupt = run_in(dir, "simulate hard.json --key " + key);
	CHECK(corrupt.exit_code != 0);
	CHECK(corrupt.output.find("corrupt") != std::string::npos);

	RunResult reset = run_in(dir, "simulate hard.json --key " + key + " --reset-state");
	CHECK(reset.exit_code == 0);
	CHECK(reset.output.find("phase: FREE") != std::string::npos);
	nlohmann::json st = nlohmann::json::parse(slurp(sf));
	CHECK(st.at("counter") == 0);
}

TEST_CASE("attack commands refuse any path that mentions a keyspec")
{
	std::string dir = fresh_dir();
	build_pipeline(dir, 5);
	RunResult r = run_in(dir, "attack brute hard.json --reference orig.json -o my_keyspec_report.json");
	CHECK(r.exit_code != 0);
	CHECK(r.output.find("policy error") != std::string::npos);
	RunResult r2 = run_in(dir, "attack brute hard.json --reference ks.json");
	CHECK(r2.exit_code != 0);
	RunResult r3 = run_in(dir, "attack dpa ks.json --resident-key 00");
	CHECK(r3.exit_code != 0);
}

TEST_CASE("brute force against a live device stops at the lockout threshold")
{
	std::string dir = fresh_dir();
	// obfuscation seed chosen so the correct key value exceeds the threshold
	build_pipeline(dir, 5, /*seed=*/1);
	RunResult r = run_in(dir, "attack brute hard.json --reference orig.json --budget 100 -o rep.json");
	REQUIRE(r.exit_code == 0);
	nlohmann::json rep = nlohmann::json::parse(slurp(dir + "/rep.json"));
	// numeric enumeration from zero locks out before reaching the key
	CHECK(rep.at("locked_out") == true);
	CHECK(rep.at("success") == false);
	CHECK(rep.at("attempts_used") == 5);
}

TEST_CASE("attack reports are byte-identical across repeated runs")
{
	std::string dir = fresh_dir();
	build_pipeline(dir, 5);
	REQUIRE(run_in(dir, "attack brute hard.json --reference orig.json --budget 50 -o r1.json").exit_code == 0);
	REQUIRE(run_in(dir, "attack brute hard.json --reference orig.json --budget 50 -o r2.json").exit_code == 0);
	CHECK(slurp(dir + "/r1.json") == slurp(dir + "/r2.json"));
}

TEST_CASE("metric subcommands print the published values")
{
	std::string dir = fresh_dir();
	CHECK(run_in(dir, "metrics keyprob -m 128 -n 128").output == "0.07e-253\n");
	CHECK(run_in(dir, "metrics keyprob -m 32 -n 32").output == "0.08e-44\n");
	CHECK(run_in(dir, "metrics mtd -M 32 -N 6 -p 16 -q 32 --r1sq 0.020").output == "19200\n");
	CHECK(run_in(dir, "metrics faulttrials -m 8 --devices 2 -X 5").output == "32\n");
	CHECK(run_in(dir, "metrics attemptprob -K 1 -X 5 -m 32 -n 32").output == "0.4e-44\n");
	CHECK(run_in(dir, "metrics keyprob -m 0 -n 1").exit_code != 0);
}

TEST_CASE("the tables subcommand flags exactly one discrepant cell")
{
	std::string dir = fresh_dir();
	RunResult text = run_in(dir, "metrics tables");
	REQUIRE(text.exit_code == 0);
	CHECK(text.output.find("flagged cells: 1") != std::string::npos);
	CHECK(text.output.find("11636") != std::string::npos);
	CHECK(text.output.find("12800") != std::string::npos);
	RunResult json = run_in(dir, "metrics tables --format json");
	REQUIRE(json.exit_code == 0);
	nlohmann::json j = nlohmann::json::parse(json.output);
	CHECK(j.at("flagged") == 1);
	CHECK(run_in(dir, "metrics tables --format xml").exit_code != 0);
}

TEST_CASE("report summarizes a hardened design and its state file")
{
	std::string dir = fresh_dir();
	build_pipeline(dir, 3);
	RunResult r = run_in(dir, "report hard.json --original orig.json --state " +
				      shell_quote(state_file(dir)));
	REQUIRE(r.exit_code == 0);
	CHECK(r.output.find("threshold 3") != std::string::npos);
	CHECK(r.output.find("key width: 6") != std::string::npos);
	CHECK(r.output.find("phase FREE") != std::string::npos);
	CHECK(r.output.find("structural overhead") != std::string::npos);
}

int main(int argc, char **argv)
{
	if (argc < 2) {
		std::fprintf(stderr, "usage: %s <cli-binary> [doctest args]\n", argv[0]);
		return 2;
	}
	g_cli = argv[1];
	doctest::Context ctx;
	ctx.applyCommandLine(argc - 1, argv + 1);
	return ctx.run();
}
