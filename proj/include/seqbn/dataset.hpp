#pragma once

// Dataset files:
//
//   # format=1
//   A:2,B:3,C:2          variable names and cardinalities
//   0,2,1                one instance per line: value indices, or '?' if missing
//
// Blank lines and other '#' lines are ignored.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "seqbn/bn.hpp"

namespace seqbn {

struct Dataset {
    VariableTable vars;
    std::vector<PartialInstance> rows;

    bool complete() const;
    /// Throws SchemaError if any value is missing.
    std::vector<Instance> complete_rows() const;
};

/// Throws SchemaError with the line number on malformed headers or rows.
Dataset parse_dataset(std::istream& in);
Dataset read_dataset(const std::filesystem::path& path);

void write_dataset(std::ostream& out, const VariableTable& vars, std::span<const PartialInstance> rows);
void write_dataset(const std::filesystem::path& path, const VariableTable& vars, std::span<const PartialInstance> rows);

std::vector<Instance> sample_instances(const BayesianNetwork& net, std::size_t count, std::uint64_t seed);

/// Hides each value independently with probability `rate`.
std::vector<PartialInstance> hide_mcar(std::span<const Instance> data, double rate, std::uint64_t seed);

std::vector<PartialInstance> as_partial(std::span<const Instance> data);

} // namespace seqbn
