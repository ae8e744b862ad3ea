#pragma once

#include <stdexcept>
#include <string>

#include "dlockout/ir.hpp"

namespace dlockout {

// Raised for malformed JSON; carries the byte position reported by the parser.
struct SyntaxError : std::runtime_error {
	explicit SyntaxError(const std::string &msg) : std::runtime_error(msg) {}
};

// Raised when the JSON is well-formed but violates a structural invariant.
struct SemanticError : std::runtime_error {
	explicit SemanticError(const std::string &msg) : std::runtime_error(msg) {}
};

Design parse_design(const std::string &text);
std::string serialize_design(const Design &d);

Design load_design_file(const std::string &path);
void save_design_file(const Design &d, const std::string &path);

} // namespace dlockout
