#include "dlockout/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <json.hpp>

namespace dlockout {

namespace {

const double kLog10Two = std::log10(2.0);

// two significant digits, then truncated at two decimal places (the table's
// convention: 0.08848 -> 0.088 -> 0.08)
double round_table_mantissa(double mant)
{
	if (mant <= 0.0)
		return 0.0;
	double scale = std::pow(10.0, std::floor(std::log10(mant)) - 1.0);
	double two_sig = std::round(mant / scale) * scale;
	return std::floor(two_sig * 100.0 + 1e-9) / 100.0;
}

std::string format_mantissa(double mant)
{
	char buf[64];
	std::snprintf(buf, sizeof(buf), "%.6f", mant);
	std::string s(buf);
	while (!s.empty() && s.back() == '0')
		s.pop_back();
	if (!s.empty() && s.back() == '.')
		s.pop_back();
	return s;
}

} // namespace

double SciNumber::value() const
{
	return std::pow(10.0, log10_value);
}

std::string SciNumber::str() const
{
	std::string s = format_mantissa(mantissa);
	if (exponent != 0)
		s += "e" + std::to_string(exponent);
	return s;
}

SciNumber SciNumber::from_log10(double lg)
{
	SciNumber n;
	n.log10_value = lg;
	double e = std::floor(lg);
	double mant = std::pow(10.0, lg - e);
	mant = std::round(mant * 10.0) / 10.0; // two significant digits in [1,10)
	if (mant >= 10.0) {
		mant /= 10.0;
		e += 1.0;
	}
	n.mantissa = mant;
	n.exponent = (long long)e;
	return n;
}

SciNumber SciNumber::parse(const std::string &s)
{
	SciNumber n;
	size_t e = s.find_first_of("eE");
	n.mantissa = std::stod(s.substr(0, e));
	n.exponent = e == std::string::npos ? 0 : std::stoll(s.substr(e + 1));
	if (n.mantissa <= 0.0)
		throw std::invalid_argument("mantissa must be positive: " + s);
	n.log10_value = std::log10(n.mantissa) + (double)n.exponent;
	return n;
}

double log10_factorial(long long n)
{
	if (n < 0)
		throw std::invalid_argument("factorial of a negative number");
	return std::lgamma((double)n + 1.0) / std::log(10.0);
}

double correlation_r0(int p, int q)
{
	if (p < 1 || q < 1 || p > q)
		throw std::invalid_argument("switching bit count must satisfy 1 <= p <= q");
	return std::sqrt((double)p / (double)q);
}

double mtd0(double r0, double c)
{
	if (r0 <= 0.0 || c <= 0.0)
		throw std::invalid_argument("mtd0 requires r0 > 0 and C > 0");
	return c / (r0 * r0);
}

double mtd1(int M, int N, double r1_sq, double mtd0_value)
{
	if (M < 1 || N < 1 || r1_sq <= 0.0 || mtd0_value <= 0.0)
		throw std::invalid_argument("mtd1 requires positive arguments");
	return (double)M * (double)N / r1_sq * mtd0_value;
}

long long truncate_count(double v)
{
	return (long long)std::floor(v + 1e-6);
}

double key_prob_log10(int m, long long n)
{
	if (m < 1 || n < 1)
		throw std::invalid_argument("key size and obfuscation count must be >= 1");
	return -(log10_factorial(n) + (double)m * kLog10Two);
}

SciNumber key_prob(int m, long long n)
{
	double lg = key_prob_log10(m, n);
	// the exponent is split per factor: floor of the factorial magnitude
	// plus floor of the power-of-two magnitude
	long long e = (long long)std::floor(log10_factorial(n)) + (long long)std::floor((double)m * kLog10Two);
	SciNumber sci;
	sci.log10_value = lg;
	sci.exponent = -e;
	sci.mantissa = round_table_mantissa(std::pow(10.0, lg + (double)e));
	return sci;
}

double binom(int n, int k)
{
	if (k < 0 || k > n)
		return 0.0;
	double v = 1.0;
	for (int i = 1; i <= k; ++i)
		v = v * (double)(n - k + i) / (double)i;
	return std::round(v);
}

double attempt_prob(int K, int X, double P)
{
	if (K < 1 || K > X)
		throw std::invalid_argument("attempt index must satisfy 1 <= K <= X");
	if (P < 0.0 || P > 1.0)
		throw std::invalid_argument("probability out of range");
	return binom(X, K) * P * (1.0 - P);
}

SciNumber attempt_prob(int K, int X, const SciNumber &P)
{
	if (K < 1 || K > X)
		throw std::invalid_argument("attempt index must satisfy 1 <= K <= X");
	SciNumber f;
	double c = binom(X, K);
	f.exponent = P.exponent;
	f.mantissa = c * P.mantissa;
	f.log10_value = std::log10(c) + P.log10_value + std::log1p(-P.value()) / std::log(10.0);
	return f;
}

double binomial_pmf(int K, int X, double P)
{
	if (K < 0 || K > X)
		throw std::invalid_argument("attempt index out of range");
	return binom(X, K) * std::pow(P, K) * std::pow(1.0 - P, X - K);
}

long long fault_trials(int m, int n_dev, int X)
{
	if (m < 1 || m > 62)
		throw std::invalid_argument("key size must be in [1, 62]");
	if (n_dev < 1)
		throw std::invalid_argument("device count must be >= 1");
	if (X < 2)
		throw std::invalid_argument("attempt threshold must be >= 2");
	unsigned long long pow2 = 1ull << m;
	unsigned long long d = (unsigned long long)n_dev * (unsigned long long)(X - 1);
	return (long long)((pow2 + d - 1) / d);
}

double binomial_two_sided_p(int successes, int trials, double p0)
{
	if (trials < 1 || successes < 0 || successes > trials || p0 <= 0.0 || p0 >= 1.0)
		throw std::invalid_argument("invalid binomial test arguments");
	auto log_pmf = [&](int k) {
		return std::lgamma(trials + 1.0) - std::lgamma(k + 1.0) - std::lgamma(trials - k + 1.0) +
		       k * std::log(p0) + (trials - k) * std::log(1.0 - p0);
	};
	double obs = log_pmf(successes);
	double p = 0.0;
	for (int k = 0; k <= trials; ++k)
		if (log_pmf(k) <= obs + 1e-9)
			p += std::exp(log_pmf(k));
	return std::min(1.0, p);
}

TablesReport reproduce_tables()
{
	TablesReport rep;

	struct Row {
		int N, p;
		double r1_sq;
		long long published;
	};
	const Row rows[] = {
	    {4, 8, 0.060, 8533},  {4, 16, 0.028, 9142},  {4, 32, 0.011, 12800},
	    {5, 8, 0.055, 11636}, {5, 16, 0.022, 14545}, {5, 32, 0.009, 17777},
	    {6, 8, 0.051, 15058}, {6, 16, 0.020, 19200}, {6, 32, 0.007, 27428},
	};
	const int M = 32, q = 32;
	for (const Row &r : rows) {
		TraceCountRow out;
		out.M = M;
		out.N = r.N;
		out.q = q;
		out.p = r.p;
		out.mtd0_value = mtd0(correlation_r0(r.p, q));
		out.r1_sq = r.r1_sq;
		out.mtd1_value = truncate_count(mtd1(M, r.N, r.r1_sq, out.mtd0_value));
		out.published = r.published;
		out.discrepancy = out.mtd1_value != out.published;
		if (out.discrepancy)
			++rep.flagged;
		rep.trace_rows.push_back(out);
	}

	struct ProbBlock {
		int m;
		long long n;
		const char *P;
		const char *f[5];
	};
	const ProbBlock blocks[] = {
	    {32, 32, "0.08e-44", {"0.4e-44", "0.8e-44", "0.8e-44", "0.4e-44", "0.08e-44"}},
	    {64, 64, "0.43e-108", {"2.15e-108", "4.3e-108", "4.3e-108", "2.15e-108", "0.43e-108"}},
	    {128, 128, "0.07e-253", {"0.35e-253", "0.7e-253", "0.7e-253", "0.35e-253", "0.07e-253"}},
	};
	const int X = 5;
	for (const ProbBlock &b : blocks) {
		SciNumber P = key_prob(b.m, b.n);
		for (int K = 1; K <= X; ++K) {
			KeyProbRow out;
			out.m = b.m;
			out.n = b.n;
			out.P = P.str();
			out.X = X;
			out.K = K;
			out.f = attempt_prob(K, X, P).str();
			out.published_P = b.P;
			out.published_f = b.f[K - 1];
			out.discrepancy = out.P != out.published_P || out.f != out.published_f;
			if (out.discrepancy)
				++rep.flagged;
			rep.key_prob_rows.push_back(out);
		}
	}
	return rep;
}

std::string tables_to_text(const TablesReport &t)
{
	std::string s;
	char buf[256];
	s += "trace counts to disclosure (C = 1)\n";
	s += "  M   N   q   p  MTD0   r1^2     MTD1  published\n";
	for (const auto &r : t.trace_rows) {
		std::snprintf(buf, sizeof(buf), "%3d %3d %3d %3d %5.0f  %.3f %8lld %10lld%s\n", r.M, r.N, r.q, r.p,
			      r.mtd0_value, r.r1_sq, r.mtd1_value, r.published,
			      r.discrepancy ? "  <- flagged" : "");
		s += buf;
	}
	s += "\nkey extraction probability (X = 5)\n";
	s += "  (m,n)        P           K  f(K,X,P)\n";
	for (const auto &r : t.key_prob_rows) {
		std::snprintf(buf, sizeof(buf), "  (%d,%lld)  %-12s %2d  %-12s%s\n", r.m, r.n, r.P.c_str(), r.K,
			      r.f.c_str(), r.discrepancy ? "  <- flagged" : "");
		s += buf;
	}
	s += "\nflagged cells: " + std::to_string(t.flagged) + "\n";
	return s;
}

std::string tables_to_csv(const TablesReport &t)
{
	std::string s = "table,M,N,q,p,mtd0,r1_sq,mtd1,published,m,n,P,X,K,f,flagged\n";
	char buf[256];
	for (const auto &r : t.trace_rows) {
		std::snprintf(buf, sizeof(buf), "traces,%d,%d,%d,%d,%.0f,%.3f,%lld,%lld,,,,,,,%d\n", r.M, r.N, r.q,
			      r.p, r.mtd0_value, r.r1_sq, r.mtd1_value, r.published, r.discrepancy ? 1 : 0);
		s += buf;
	}
	for (const auto &r : t.key_prob_rows) {
		std::snprintf(buf, sizeof(buf), "keyprob,,,,,,,,,%d,%lld,%s,%d,%d,%s,%d\n", r.m, r.n, r.P.c_str(),
			      r.X, r.K, r.f.c_str(), r.discrepancy ? 1 : 0);
		s += buf;
	}
	return s;
}

std::string tables_to_json(const TablesReport &t)
{
	nlohmann::ordered_json j;
	j["trace_counts"] = nlohmann::ordered_json::array();
	for (const auto &r : t.trace_rows)
		j["trace_counts"].push_back({{"M", r.M},
					     {"N", r.N},
					     {"q", r.q},
					     {"p", r.p},
					     {"mtd0", r.mtd0_value},
					     {"r1_sq", r.r1_sq},
					     {"mtd1", r.mtd1_value},
					     {"published", r.published},
					     {"flagged", r.discrepancy}});
	j["key_prob"] = nlohmann::ordered_json::array();
	for (const auto &r : t.key_prob_rows)
		j["key_prob"].push_back({{"m", r.m},
					 {"n", r.n},
					 {"P", r.P},
					 {"X", r.X},
					 {"K", r.K},
					 {"f", r.f},
					 {"flagged", r.discrepancy}});
	j["flagged"] = t.flagged;
	return j.dump(2) + "\n";
}

} // namespace dlockout
