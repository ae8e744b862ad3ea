#pragma once

#include <string>
#include <vector>

#include "dlockout/ir.hpp"

namespace dlockout {

struct ValidationEntry {
	std::string code;    // e.g. "multiple-drivers", "comb-cycle", "timing"
	std::string subject; // offending node/net/state id
	std::string message;
};

struct ValidationReport {
	std::vector<ValidationEntry> entries;
	bool ok() const { return entries.empty(); }
	bool has(const std::string &code) const;
};

ValidationReport validate_design(const Design &d);

} // namespace dlockout
