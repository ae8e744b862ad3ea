#include "dlockout/timing.hpp"

#include <algorithm>
#include <functional>
#include <unordered_map>
#include <unordered_set>

namespace dlockout {

namespace {

bool is_combinational(NodeKind k)
{
	return k == NodeKind::FunctionalUnit || k == NodeKind::Mux || k == NodeKind::Comparator;
}

struct CombGraph {
	// net id -> combinational consumer nodes
	std::unordered_map<std::string, std::vector<const Node *>> consumers;
	// net id -> combinational driver node (nullptr for sequential/source nets)
	std::unordered_map<std::string, const Node *> comb_driver;
	std::vector<const Node *> comb_nodes;
};

CombGraph build_comb_graph(const DatapathGraph &g)
{
	CombGraph cg;
	for (const auto &node : g.nodes) {
		if (!is_combinational(node.kind))
			continue;
		cg.comb_nodes.push_back(&node);
		for (const auto &in : node.inputs)
			cg.consumers[in].push_back(&node);
		if (!node.output.empty())
			cg.comb_driver[node.output] = &node;
	}
	return cg;
}

} // namespace

std::vector<std::string> find_combinational_cycle(const DatapathGraph &g)
{
	CombGraph cg = build_comb_graph(g);
	enum { White, Gray, Black };
	std::unordered_map<const Node *, int> color;
	std::vector<std::string> stack_nets;
	std::vector<std::string> cycle;

	std::function<bool(const Node *)> dfs = [&](const Node *n) {
		color[n] = Gray;
		stack_nets.push_back(n->output);
		for (const auto &in : n->inputs) {
			auto it = cg.comb_driver.find(in);
			if (it == cg.comb_driver.end())
				continue;
			const Node *pred = it->second;
			int c = color.count(pred) ? color[pred] : White;
			if (c == Gray) {
				// unwind the stack back to pred's output
				auto pos = std::find(stack_nets.begin(), stack_nets.end(), pred->output);
				cycle.assign(pos, stack_nets.end());
				return true;
			}
			if (c == White && dfs(pred))
				return true;
		}
		stack_nets.pop_back();
		color[n] = Black;
		return false;
	};

	for (const Node *n : cg.comb_nodes) {
		if ((color.count(n) ? color[n] : White) == White && dfs(n))
			return cycle;
	}
	return {};
}

std::vector<const Node *> combinational_topo_order(const DatapathGraph &g)
{
	CombGraph cg = build_comb_graph(g);
	std::unordered_map<const Node *, int> indeg;
	for (const Node *n : cg.comb_nodes) {
		int deg = 0;
		for (const auto &in : n->inputs)
			if (cg.comb_driver.count(in))
				++deg;
		indeg[n] = deg;
	}
	std::vector<const Node *> order;
	std::vector<const Node *> ready;
	for (const Node *n : cg.comb_nodes)
		if (indeg[n] == 0)
			ready.push_back(n);
	while (!ready.empty()) {
		const Node *n = ready.back();
		ready.pop_back();
		order.push_back(n);
		for (const Node *succ : cg.consumers[n->output])
			if (--indeg[succ] == 0)
				ready.push_back(succ);
	}
	if (order.size() != cg.comb_nodes.size()) {
		auto cyc = find_combinational_cycle(g);
		std::string msg = "combinational cycle through nets:";
		for (const auto &net : cyc)
			msg += " " + net;
		throw CyclicGraphError(msg);
	}
	return order;
}

SlackMap compute_slack(const Design &d)
{
	const DatapathGraph &g = d.datapath;
	CombGraph cg = build_comb_graph(g);
	std::vector<const Node *> order = combinational_topo_order(g);

	// Longest arrival from any sequential/source startpoint to each net.
	std::unordered_map<std::string, double> arrival;
	for (const auto &net : g.nets)
		arrival[net.id] = 0.0;
	for (const Node *n : order) {
		double at = 0.0;
		for (const auto &in : n->inputs)
			at = std::max(at, arrival[in]);
		arrival[n->output] = std::max(arrival[n->output], at + n->delay_ns);
	}

	// Longest remaining path from each net to any endpoint.
	std::unordered_map<std::string, double> downstream;
	for (const auto &net : g.nets)
		downstream[net.id] = 0.0;
	for (auto it = order.rbegin(); it != order.rend(); ++it) {
		const Node *n = *it;
		for (const auto &in : n->inputs)
			downstream[in] = std::max(downstream[in], n->delay_ns + downstream[n->output]);
	}

	SlackMap sm;
	double critical = 0.0;
	for (const auto &net : g.nets)
		critical = std::max(critical, arrival[net.id] + downstream[net.id]);
	sm.critical_path_ns = critical;
	for (const auto &net : g.nets) {
		double through = arrival[net.id] + downstream[net.id];
		sm.slack_ns[net.id] = d.clock_period_ns - through;
	}
	return sm;
}

} // namespace dlockout
