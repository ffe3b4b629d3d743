#pragma once

// Line-oriented network text format:
//
//   vars <n>
//   var <name> <cardinality>          (n lines)
//   parents <child> <parent>*         (n lines)
//   cpt <child>                       (one block per variable)
//   <card(child) probabilities>       (one line per parent configuration)
//
// Parent configurations are in mixed radix order, lowest-id parent fastest.
// Blank lines and '#' comments are ignored.

#include <filesystem>
#include <iosfwd>
#include <string>

#include "seqbn/bn.hpp"

namespace seqbn {

/// Throws ParseError carrying the offending line number.
BayesianNetwork parse_network(std::istream& in);
BayesianNetwork read_network(const std::filesystem::path& path);

void write_network(std::ostream& out, const BayesianNetwork& net);
void write_network(const std::filesystem::path& path, const BayesianNetwork& net);
std::string to_string(const BayesianNetwork& net);

} // namespace seqbn
