#include "dlockout/obfuscate.hpp"

#include <algorithm>
#include <queue>
#include <set>

#include <json.hpp>

#include "dlockout/timing.hpp"
#include "dlockout/validate.hpp"

namespace dlockout {

namespace {

bool driven_by_kind(const DatapathGraph &g, const Net &net, NodeKind kind)
{
	if (net.driver.rfind("node:", 0) != 0)
		return false;
	const Node *n = g.find_node(net.driver.substr(5));
	return n && n->kind == kind;
}

// Nets reachable downstream from `from`. With through_registers the walk
// crosses register boundaries (any-cycle influence); without, registers stop
// it (same-cycle influence, used to keep decoy selection acyclic).
std::set<std::string> descendants(const DatapathGraph &g, const std::string &from, bool through_registers)
{
	std::map<std::string, std::vector<const Node *>> consumers;
	for (const Node &n : g.nodes)
		for (const std::string &in : n.inputs)
			consumers[in].push_back(&n);

	std::set<std::string> seen = {from};
	std::queue<std::string> work;
	work.push(from);
	while (!work.empty()) {
		std::string net = work.front();
		work.pop();
		for (const Node *n : consumers[net]) {
			if (n->kind == NodeKind::Register && !through_registers)
				continue;
			if (seen.insert(n->output).second)
				work.push(n->output);
		}
	}
	return seen;
}

std::set<std::string> comb_descendants(const DatapathGraph &g, const std::string &from)
{
	return descendants(g, from, false);
}

} // namespace

std::vector<std::string> select_points(const Design &d, int m, const SelectionPolicy &policy)
{
	if (m < 0)
		throw InsertionError("point count must be >= 0");
	if (m == 0)
		return {};

	SlackMap slack = compute_slack(d);
	std::set<std::string> hosts;
	for (const ObfuscationPoint &p : d.points)
		hosts.insert(p.host_net);

	struct Candidate {
		std::string net;
		double slack_ns;
	};
	std::vector<Candidate> candidates;
	for (const Net &net : d.datapath.nets) {
		bool comb_op = driven_by_kind(d.datapath, net, NodeKind::FunctionalUnit) ||
			       driven_by_kind(d.datapath, net, NodeKind::Mux);
		if (!comb_op || hosts.count(net.id))
			continue;
		if (net.driver.rfind("node:", 0) == 0) {
			const Node *drv = d.datapath.find_node(net.driver.substr(5));
			if (drv && !drv->point_id.empty())
				continue; // key mux outputs are off limits
		}
		auto it = slack.slack_ns.find(net.id);
		if (it == slack.slack_ns.end())
			continue;
		if (it->second < kMuxDelayNs + kComparatorDelayNs)
			continue; // would lengthen the critical path
		candidates.push_back({net.id, it->second});
	}

	if ((int)candidates.size() < m)
		throw InsertionError("only " + std::to_string(candidates.size()) +
				     " nets qualify for key insertion, need " + std::to_string(m));

	std::sort(candidates.begin(), candidates.end(), [](const Candidate &a, const Candidate &b) {
		if (a.slack_ns != b.slack_ns)
			return a.slack_ns > b.slack_ns;
		return a.net < b.net;
	});

	if (policy.kind == SelectionPolicyKind::Random) {
		// deterministic Fisher-Yates on the sorted list
		for (size_t i = candidates.size() - 1; i > 0; --i) {
			size_t j = mix64(policy.seed ^ (0xc0ffeeull + i)) % (i + 1);
			std::swap(candidates[i], candidates[j]);
		}
	}

	// greedy pick of pairwise independent hosts: no chosen net may lie in
	// the fan-out cone of another (even across register boundaries), so no
	// key mux ever drives, directly or through state, another key mux's
	// data inputs
	std::vector<std::string> out;
	std::vector<std::set<std::string>> chosen_desc;
	out.reserve(m);
	for (const Candidate &c : candidates) {
		if ((int)out.size() == m)
			break;
		std::set<std::string> desc = descendants(d.datapath, c.net, true);
		bool independent = true;
		for (size_t i = 0; i < out.size() && independent; ++i)
			if (desc.count(out[i]) || chosen_desc[i].count(c.net))
				independent = false;
		if (!independent)
			continue;
		out.push_back(c.net);
		chosen_desc.push_back(std::move(desc));
	}
	if ((int)out.size() < m)
		throw InsertionError("only " + std::to_string(out.size()) +
				     " mutually independent nets qualify for key insertion, need " +
				     std::to_string(m));
	return out;
}

ObfuscationResult insert_key_muxes(const Design &d, const std::vector<std::string> &nets, std::uint64_t key_seed,
				   DecoyPolicy decoy_policy)
{
	if (nets.empty())
		throw InsertionError("no nets given for key insertion");
	{
		std::set<std::string> uniq(nets.begin(), nets.end());
		if (uniq.size() != nets.size())
			throw InsertionError("duplicate net in key insertion list");
	}

	ObfuscationResult res;
	res.design = d;
	Design &out = res.design;

	int base = out.key_width;
	int m = (int)nets.size();

	// Longest input-to-net arrival per net: a decoy must not lengthen the
	// path through the new mux, so its arrival is bounded by the host's
	// arrival plus the host's slack budget (minus the mux delay).
	auto arrival_map = [](const Design &dd) {
		std::map<std::string, double> at;
		for (const Net &net : dd.datapath.nets)
			at[net.id] = 0.0;
		for (const Node *n : combinational_topo_order(dd.datapath)) {
			double a = 0.0;
			for (const std::string &in : n->inputs)
				a = std::max(a, at[in]);
			at[n->output] = std::max(at[n->output], a + n->delay_ns);
		}
		return at;
	};

	// seed-derived assignment of key bit indices to points
	std::vector<int> key_bits(m);
	for (int i = 0; i < m; ++i)
		key_bits[i] = base + i;
	for (int i = m - 1; i > 0; --i) {
		int j = (int)(mix64(key_seed ^ (0xb17ull + i)) % (std::uint64_t)(i + 1));
		std::swap(key_bits[i], key_bits[j]);
	}

	res.keyspec.correct_key.assign(base + m, 0);
	res.keyspec.mask_vector.assign(base + m, 0);
	for (const ObfuscationPoint &p : out.points)
		res.keyspec.correct_key[p.key_bit_index] = p.masked ? p.mask_bit : p.reference_bit;

	for (int i = 0; i < m; ++i) {
		const std::string &host = nets[i];
		const Net *host_net = out.datapath.find_net(host);
		if (!host_net)
			throw InsertionError("unknown net: " + host);
		if (!driven_by_kind(out.datapath, *host_net, NodeKind::FunctionalUnit) &&
		    !driven_by_kind(out.datapath, *host_net, NodeKind::Mux))
			throw InsertionError("net " + host + " is not an operation output");
		for (const ObfuscationPoint &p : out.points)
			if (p.host_net == host)
				throw InsertionError("net " + host + " already hosts a key mux");

		int bit = key_bits[i];
		int ref = (int)(mix64(key_seed ^ (0x4efull + bit)) & 1ull);
		int width = host_net->width;

		// decoy: equal-width net that is not combinationally downstream
		// of the host (no cycle through the new mux) and whose arrival
		// fits in the host's slack budget (no new critical path)
		std::set<std::string> forbidden = comb_descendants(out.datapath, host);
		SlackMap cur_slack = compute_slack(res.design);
		std::map<std::string, double> arrivals = arrival_map(res.design);
		double arrival_budget =
		    arrivals.at(host) + cur_slack.slack_ns.at(host) - kMuxDelayNs + 1e-9;
		std::vector<std::string> decoys;
		std::vector<std::string> const_decoys;
		for (const Net &net : out.datapath.nets) {
			if (net.width != width || forbidden.count(net.id))
				continue;
			if (net.driver.rfind("key:", 0) == 0)
				continue;
			if (arrivals.at(net.id) > arrival_budget)
				continue;
			decoys.push_back(net.id);
			if (driven_by_kind(out.datapath, net, NodeKind::Constant))
				const_decoys.push_back(net.id);
		}
		if (decoy_policy == DecoyPolicy::PreferConstant && !const_decoys.empty())
			decoys = std::move(const_decoys);
		if (decoys.empty())
			throw InsertionError("no eligible decoy net for " + host);
		std::sort(decoys.begin(), decoys.end());
		std::string decoy = decoys[mix64(key_seed ^ (0xdec0ull + bit)) % decoys.size()];

		ObfuscationPoint p;
		p.point_id = "pt" + std::to_string(bit);
		p.host_net = host;
		p.mux_node_id = "km_" + std::to_string(bit);
		p.key_bit_index = bit;
		p.reference_bit = ref;
		p.decoy_net = decoy;

		std::string key_net = "key_" + std::to_string(bit);
		out.datapath.nets.push_back({key_net, 1, "key:" + std::to_string(bit)});
		std::string mux_out = "ko_" + std::to_string(bit);
		out.datapath.nets.push_back({mux_out, width, "node:" + p.mux_node_id});

		// consumers of the host now observe the mux output
		for (Node &n : out.datapath.nodes)
			for (std::string &in : n.inputs)
				if (in == host)
					in = mux_out;
		for (OutputBinding &ob : out.outputs)
			if (ob.net == host)
				ob.net = mux_out;

		Node mux;
		mux.id = p.mux_node_id;
		mux.kind = NodeKind::Mux;
		mux.width = width;
		mux.delay_ns = kMuxDelayNs;
		mux.point_id = p.point_id;
		mux.inputs = ref == 0 ? std::vector<std::string>{host, decoy, key_net}
				      : std::vector<std::string>{decoy, host, key_net};
		mux.output = mux_out;
		out.datapath.nodes.push_back(std::move(mux));

		res.keyspec.correct_key[bit] = ref;
		out.points.push_back(p);
		res.points.push_back(p);
	}

	out.key_width = base + m;

	ValidationReport report = validate_design(out);
	if (!report.ok())
		throw InsertionError("key insertion broke the design: " + report.entries.front().message);
	return res;
}

MaskingResult apply_masking(const Design &d, const std::vector<std::string> &point_ids, std::uint64_t mask_seed)
{
	if (d.points.empty())
		throw InsertionError("design has no obfuscation points to mask");
	std::set<std::string> wanted(point_ids.begin(), point_ids.end());
	for (const std::string &id : wanted)
		if (!d.point_by_id(id))
			throw InsertionError("unknown obfuscation point: " + id);

	MaskingResult res;
	res.design = d;
	Design &out = res.design;
	res.keyspec.correct_key.assign(out.key_width, 0);
	res.keyspec.mask_vector.assign(out.key_width, 0);

	for (ObfuscationPoint &p : out.points) {
		if (!wanted.empty() && !wanted.count(p.point_id)) {
			res.keyspec.correct_key[p.key_bit_index] = p.masked ? p.mask_bit : p.reference_bit;
			if (p.masked)
				res.keyspec.mask_vector[p.key_bit_index] = p.mask_bit;
			continue;
		}
		if (p.masked)
			throw InsertionError("point " + p.point_id + " is already masked");
		Node *mux = nullptr;
		for (Node &n : out.datapath.nodes)
			if (n.id == p.mux_node_id)
				mux = &n;
		if (!mux)
			throw InsertionError("point " + p.point_id + " has no mux node");

		// normalize the original input to index 0, so the correct
		// selector value is always 0 and the key bit equals the mask
		if (p.reference_bit == 1) {
			std::swap(mux->inputs[0], mux->inputs[1]);
			p.reference_bit = 0;
		}
		p.masked = true;
		p.mask_bit = (int)(mix64(mask_seed ^ (0x3a5cull + p.key_bit_index)) & 1ull);
		res.keyspec.correct_key[p.key_bit_index] = p.mask_bit;
		res.keyspec.mask_vector[p.key_bit_index] = p.mask_bit;
	}

	ValidationReport report = validate_design(out);
	if (!report.ok())
		throw InsertionError("masking broke the design: " + report.entries.front().message);
	return res;
}

std::string keyspec_to_json(const Design &d, const KeySpec &ks)
{
	nlohmann::ordered_json j;
	j["design"] = d.name;
	j["key_width"] = d.key_width;
	j["correct_key"] = bits_to_hex(ks.correct_key);
	j["mask_vector"] = bits_to_hex(ks.mask_vector);
	nlohmann::ordered_json pts = nlohmann::ordered_json::array();
	for (const ObfuscationPoint &p : d.points) {
		nlohmann::ordered_json pj;
		pj["point_id"] = p.point_id;
		pj["key_bit"] = p.key_bit_index;
		pj["host_net"] = p.host_net;
		pj["masked"] = p.masked;
		pts.push_back(pj);
	}
	j["points"] = pts;
	return j.dump(2) + "\n";
}

KeySpec keyspec_from_json(const std::string &text, int key_width)
{
	nlohmann::json j = nlohmann::json::parse(text);
	KeySpec ks;
	ks.correct_key = hex_to_bits(j.at("correct_key").get<std::string>(), key_width);
	ks.mask_vector = hex_to_bits(j.at("mask_vector").get<std::string>(), key_width);
	int declared = j.at("key_width").get<int>();
	if (declared != key_width)
		throw std::runtime_error("keyspec key width " + std::to_string(declared) +
					 " does not match design key width " + std::to_string(key_width));
	return ks;
}

} // namespace dlockout
