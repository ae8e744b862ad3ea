#include "dlockout/json_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dlockout/validate.hpp"

namespace dlockout {

using nlohmann::json;

namespace {

json control_word_to_json(const ControlWord &cw)
{
	json j = json::object();
	json sel = json::object();
	for (const auto &[k, v] : cw.mux_sel)
		sel[k] = v;
	json en = json::object();
	for (const auto &[k, v] : cw.reg_en)
		en[k] = v;
	j["mux_sel"] = sel;
	j["reg_en"] = en;
	return j;
}

ControlWord control_word_from_json(const json &j)
{
	ControlWord cw;
	if (j.contains("mux_sel"))
		for (auto it = j.at("mux_sel").begin(); it != j.at("mux_sel").end(); ++it)
			cw.mux_sel[it.key()] = it.value().get<int>();
	if (j.contains("reg_en"))
		for (auto it = j.at("reg_en").begin(); it != j.at("reg_en").end(); ++it)
			cw.reg_en[it.key()] = it.value().get<bool>();
	return cw;
}

json node_to_json(const Node &n)
{
	json params = json::object();
	switch (n.kind) {
	case NodeKind::FunctionalUnit:
		params["op"] = to_string(n.op);
		params["delay_ns"] = n.delay_ns;
		break;
	case NodeKind::Register:
		params["width"] = n.width;
		break;
	case NodeKind::Mux:
		params["width"] = n.width;
		params["delay_ns"] = n.delay_ns;
		break;
	case NodeKind::Constant:
		params["width"] = n.width;
		params["value"] = n.value;
		break;
	case NodeKind::Comparator:
		params["delay_ns"] = n.delay_ns;
		params["shadow"] = n.shadow;
		params["point"] = n.point_id;
		break;
	}
	json j;
	j["id"] = n.id;
	j["kind"] = to_string(n.kind);
	j["params"] = params;
	j["inputs"] = n.inputs;
	j["output"] = n.output;
	return j;
}

Node node_from_json(const json &j)
{
	Node n;
	n.id = j.at("id").get<std::string>();
	auto kind = node_kind_from_string(j.at("kind").get<std::string>());
	if (!kind)
		throw SemanticError("unknown node kind '" + j.at("kind").get<std::string>() + "' on node " + n.id);
	n.kind = *kind;
	const json &params = j.value("params", json::object());
	switch (n.kind) {
	case NodeKind::FunctionalUnit: {
		auto op = op_kind_from_string(params.at("op").get<std::string>());
		if (!op)
			throw SemanticError("unknown op '" + params.at("op").get<std::string>() + "' on node " + n.id);
		n.op = *op;
		n.delay_ns = params.value("delay_ns", default_op_delay_ns(n.op));
		break;
	}
	case NodeKind::Register:
		n.width = params.at("width").get<int>();
		break;
	case NodeKind::Mux:
		n.width = params.at("width").get<int>();
		n.delay_ns = params.value("delay_ns", kMuxDelayNs);
		break;
	case NodeKind::Constant:
		n.width = params.at("width").get<int>();
		n.value = params.at("value").get<std::uint64_t>();
		break;
	case NodeKind::Comparator:
		n.delay_ns = params.value("delay_ns", kComparatorDelayNs);
		n.shadow = params.value("shadow", false);
		n.point_id = params.value("point", std::string());
		break;
	}
	if (j.contains("inputs"))
		n.inputs = j.at("inputs").get<std::vector<std::string>>();
	n.output = j.value("output", std::string());
	return n;
}

} // namespace

Design parse_design(const std::string &text)
{
	json j;
	try {
		j = json::parse(text);
	} catch (const json::parse_error &e) {
		throw SyntaxError(e.what());
	}

	Design d;
	try {
		if (j.value("ir_version", 0) != kIrVersion)
			throw SemanticError("unsupported or missing ir_version (expected 1)");
		d.name = j.at("name").get<std::string>();
		d.clock_period_ns = j.at("clock_period_ns").get<double>();
		for (const auto &p : j.at("inputs"))
			d.inputs.push_back({p.at("name").get<std::string>(), p.at("width").get<int>()});
		for (const auto &p : j.at("outputs"))
			d.outputs.push_back({p.at("name").get<std::string>(), p.at("width").get<int>(),
					     p.at("net").get<std::string>()});
		for (const auto &nj : j.at("nodes"))
			d.datapath.nodes.push_back(node_from_json(nj));
		for (const auto &nj : j.at("nets"))
			d.datapath.nets.push_back({nj.at("id").get<std::string>(), nj.at("width").get<int>(),
						   nj.at("driver").get<std::string>()});

		const json &ctrl = j.at("controller");
		d.controller.reset_state = ctrl.at("reset").get<std::string>();
		for (const auto &sj : ctrl.at("states")) {
			FsmState st;
			st.name = sj.at("name").get<std::string>();
			st.control_word = control_word_from_json(sj.value("control_word", json::object()));
			d.controller.states.push_back(std::move(st));
		}
		for (const auto &tj : ctrl.at("transitions"))
			d.controller.transitions.push_back({tj.at("from").get<std::string>(),
							    tj.value("cond", std::string(kCondAlways)),
							    tj.at("to").get<std::string>()});

		d.key_width = j.value("key_width", 0);
		if (j.contains("obfuscation")) {
			for (const auto &pj : j.at("obfuscation").at("points")) {
				ObfuscationPoint p;
				p.point_id = pj.at("point_id").get<std::string>();
				p.host_net = pj.at("host_net").get<std::string>();
				p.mux_node_id = pj.at("mux").get<std::string>();
				p.key_bit_index = pj.at("key_bit").get<int>();
				p.reference_bit = pj.at("correct_input").get<int>();
				p.decoy_net = pj.at("decoy_net").get<std::string>();
				p.masked = pj.value("masked", false);
				p.mask_bit = pj.value("mask_bit", 0);
				d.points.push_back(std::move(p));
			}
		}
		if (j.contains("dlockout")) {
			const json &dl = j.at("dlockout");
			DlockoutInfo info;
			info.threshold = dl.at("threshold").get<int>();
			info.checker = dl.value("checker", false);
			info.edu = dl.value("edu", false);
			info.blackhole_state = dl.value("blackhole_state", std::string());
			info.check_state = dl.value("check_state", std::string());
			d.dlockout = info;
		}
	} catch (const json::exception &e) {
		throw SemanticError(e.what());
	}

	ValidationReport report = validate_design(d);
	if (!report.entries.empty())
		throw SemanticError(report.entries.front().message);
	return d;
}

std::string serialize_design(const Design &d)
{
	json j;
	j["ir_version"] = kIrVersion;
	j["name"] = d.name;
	j["clock_period_ns"] = d.clock_period_ns;
	j["inputs"] = json::array();
	for (const auto &p : d.inputs)
		j["inputs"].push_back({{"name", p.name}, {"width", p.width}});
	j["outputs"] = json::array();
	for (const auto &p : d.outputs)
		j["outputs"].push_back({{"name", p.name}, {"width", p.width}, {"net", p.net}});
	j["nodes"] = json::array();
	for (const auto &n : d.datapath.nodes)
		j["nodes"].push_back(node_to_json(n));
	j["nets"] = json::array();
	for (const auto &n : d.datapath.nets)
		j["nets"].push_back({{"id", n.id}, {"width", n.width}, {"driver", n.driver}});

	json ctrl;
	ctrl["reset"] = d.controller.reset_state;
	ctrl["states"] = json::array();
	for (const auto &s : d.controller.states)
		ctrl["states"].push_back({{"name", s.name}, {"control_word", control_word_to_json(s.control_word)}});
	ctrl["transitions"] = json::array();
	for (const auto &t : d.controller.transitions)
		ctrl["transitions"].push_back({{"from", t.from}, {"cond", t.cond}, {"to", t.to}});
	j["controller"] = ctrl;

	j["key_width"] = d.key_width;
	if (!d.points.empty()) {
		json pts = json::array();
		for (const auto &p : d.points) {
			json pj;
			pj["point_id"] = p.point_id;
			pj["host_net"] = p.host_net;
			pj["mux"] = p.mux_node_id;
			pj["key_bit"] = p.key_bit_index;
			pj["correct_input"] = p.reference_bit;
			pj["decoy_net"] = p.decoy_net;
			pj["masked"] = p.masked;
			pj["mask_bit"] = p.mask_bit;
			pts.push_back(std::move(pj));
		}
		j["obfuscation"] = {{"points", pts}};
	}
	if (d.dlockout) {
		j["dlockout"] = {{"threshold", d.dlockout->threshold},
				 {"checker", d.dlockout->checker},
				 {"edu", d.dlockout->edu},
				 {"blackhole_state", d.dlockout->blackhole_state},
				 {"check_state", d.dlockout->check_state}};
	}
	return j.dump(2) + "\n";
}

Design load_design_file(const std::string &path)
{
	std::ifstream in(path);
	if (!in)
		throw std::runtime_error("cannot open design file: " + path);
	std::ostringstream ss;
	ss << in.rdbuf();
	return parse_design(ss.str());
}

void save_design_file(const Design &d, const std::string &path)
{
	std::ofstream out(path);
	if (!out)
		throw std::runtime_error("cannot write design file: " + path);
	out << serialize_design(d);
}

} // namespace dlockout
