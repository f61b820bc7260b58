#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "autofocus/geometry.hpp"

namespace autofocus {

// Runs one subcommand. Returns the process exit status; diagnostics go to err.
int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// "480,512;800,1280" -> scales 1..n
std::vector<ScaleSpec> parse_scales(const std::string& text);
// "90,inf;30,160;0,90"
std::vector<ValidRange> parse_ranges(const std::string& text);
// "64,128,256"
std::vector<double> parse_numbers(const std::string& text, const std::string& what);

}  // namespace autofocus
