#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "dlockout/ir.hpp"

namespace dlockout {

// Per-net slack against the clock period: slack(net) = clock - longest
// combinational path through the net. Critical-path nets have slack 0 when
// the design is clock-limited.
struct SlackMap {
	std::map<std::string, double> slack_ns;
	double critical_path_ns = 0.0;
};

struct CyclicGraphError : std::runtime_error {
	explicit CyclicGraphError(const std::string &msg) : std::runtime_error(msg) {}
};

// Topological order of combinational nodes; throws CyclicGraphError and
// reports the nets on one cycle if the combinational graph is cyclic.
std::vector<const Node *> combinational_topo_order(const DatapathGraph &g);

// Returns the nets on a combinational cycle, empty if acyclic.
std::vector<std::string> find_combinational_cycle(const DatapathGraph &g);

SlackMap compute_slack(const Design &d);

} // namespace dlockout
