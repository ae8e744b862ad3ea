#pragma once

#include <cstdint>
#include <string>

#include "dlockout/ir.hpp"

namespace dlockout {

enum class BenchmarkKind { Fir, Elliptic, Lattice, FftLike };

std::optional<BenchmarkKind> benchmark_kind_from_string(const std::string &s);
const char *to_string(BenchmarkKind k);

struct BenchmarkOptions {
	int width = 8;        // datapath bit width q
	int sched_states = 4; // schedule states N (S1..SN)
};

// Synthetic datapath-intensive design, deterministic in (kind, size, seed).
// Guarantees >= size key-insertable nets with positive slack and a
// clock-limited critical chain (so insertion never lengthens the critical
// path). size >= 4.
Design generate_benchmark(BenchmarkKind kind, int size, std::uint64_t seed, const BenchmarkOptions &opts = {});

// Power-analysis evaluation fixture: `taps` independent input ports, one
// register-backed mixing tap per port (the insertion candidates), plus a
// ballast bank on a separate wide port that pins the background power
// variance regardless of how many tap bits switch.
Design generate_dpa_testbed(int taps, int width, int ballast, std::uint64_t seed);

} // namespace dlockout
