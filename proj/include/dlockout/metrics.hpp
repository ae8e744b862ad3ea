#pragma once

#include <string>
#include <vector>

namespace dlockout {

// A tiny positive number kept in log10 form, with a rendering that matches the
// keyed-probability tables: the exponent splits into the factorial part and
// the power-of-two part, and the mantissa keeps two significant digits
// truncated at two decimals (so 8.848e-46 prints as "0.08e-44").
struct SciNumber {
	double log10_value = 0.0; // exact magnitude: value = 10^log10_value
	double mantissa = 0.0;    // as printed
	long long exponent = 0;   // as printed ("e-44" -> -44)

	double value() const;
	std::string str() const;

	static SciNumber from_log10(double lg);  // standard normalization, 2 sig digits
	static SciNumber parse(const std::string &s);
};

double log10_factorial(long long n);

// correlation between switching input bits and dynamic power, r0 = sqrt(p/q)
double correlation_r0(int p, int q);

// measurements-to-disclosure baseline, C / r0^2
double mtd0(double r0, double c = 1.0);

// MTD with M key bits spread over N control steps: (M*N / r1^2) * mtd0
double mtd1(int M, int N, double r1_sq, double mtd0_value);

// table rendering truncates fractional trace counts
long long truncate_count(double v);

// P(m,n) = 1 / (n! * 2^m), exact in log domain
double key_prob_log10(int m, long long n);
SciNumber key_prob(int m, long long n);

// f(K,X,P) = C(X,K) * P * (1-P), implemented exactly as published. The
// standard binomial pmf C(X,K) * P^K * (1-P)^(X-K) is available separately
// and is never used by default.
double attempt_prob(int K, int X, double P);
SciNumber attempt_prob(int K, int X, const SciNumber &P);
double binomial_pmf(int K, int X, double P);

double binom(int n, int k);

// ceil(2^m / (n_dev * (X - 1)))
long long fault_trials(int m, int n_dev, int X);

// two-sided binomial test p-value for `successes` out of `trials` under p0
double binomial_two_sided_p(int successes, int trials, double p0);

struct TraceCountRow {
	int M, N, q, p;
	double mtd0_value;
	double r1_sq;
	long long mtd1_value;    // computed
	long long published;     // as printed
	bool discrepancy;        // computed != published
};

struct KeyProbRow {
	int m;
	long long n;
	std::string P; // rendered
	int X, K;
	std::string f; // rendered
	std::string published_P;
	std::string published_f;
	bool discrepancy;
};

struct TablesReport {
	std::vector<TraceCountRow> trace_rows;
	std::vector<KeyProbRow> key_prob_rows;
	int flagged = 0;
};

TablesReport reproduce_tables();

std::string tables_to_text(const TablesReport &t);
std::string tables_to_csv(const TablesReport &t);
std::string tables_to_json(const TablesReport &t);

} // namespace dlockout
