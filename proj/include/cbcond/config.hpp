#pragma once

// Mechanism configuration documents:
//
//   {"alpha": 1.0, "sigma2": 2.0,
//    "levy": {"kind": "none" | "power_law" | "table", ...},
//    "closed_form": "quadratic" | "stable(1.5)" | "linear_plus_quadratic",
//    "tol": 1e-10}
//
// power_law takes "c" and "a"; table takes "r", "density" and an optional
// "tail_exponent". With a closed_form, omitted triplet fields are filled in
// from the registry and present ones are cross-checked.

#include <string>
#include <string_view>

#include <json.hpp>

#include "cbcond/mechanism.hpp"

namespace cbcond {

BranchingMechanism mechanism_from_json(const nlohmann::json& doc);
// Syntax errors report the line and column.
nlohmann::json parse_config_text(std::string_view text);
BranchingMechanism mechanism_from_text(std::string_view text);
nlohmann::json mechanism_to_json(const BranchingMechanism& m);

// Reads a whole file; throws ConfigError when it cannot be opened.
std::string read_file(const std::string& path);

}  // namespace cbcond
