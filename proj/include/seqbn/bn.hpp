#pragma once

// Discrete Bayesian networks: variables, DAG structure, CPTs, sampling and
// exact inference by enumeration.
//
// Values are dense integers 0..card-1. Any joint configuration over a sorted
// variable list is indexed in mixed radix with the lowest-id variable as the
// fastest-varying digit; CPT rows follow the same rule over the parent list.
//
// Inference enumerates completions of the unobserved variables, so its cost is
// the product of their cardinalities. It is meant for small networks only.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace seqbn {

using Instance = std::vector<int>;
using PartialInstance = std::vector<std::optional<int>>;
using Rng = std::mt19937_64;

struct Variable {
    std::string name;
    int cardinality = 2;

    bool operator==(const Variable&) const = default;
};

class VariableTable {
public:
    VariableTable() = default;
    explicit VariableTable(std::vector<Variable> vars);

    int size() const { return static_cast<int>(vars_.size()); }
    const Variable& operator[](int id) const { return vars_.at(static_cast<std::size_t>(id)); }
    int cardinality(int id) const { return (*this)[id].cardinality; }
    std::vector<int> cardinalities() const;
    std::optional<int> find(std::string_view name) const;

    auto begin() const { return vars_.begin(); }
    auto end() const { return vars_.end(); }

    bool operator==(const VariableTable&) const = default;

private:
    std::vector<Variable> vars_;
};

/// Number of joint states of `vars` (product of cardinalities).
std::size_t joint_state_count(const VariableTable& table, std::span<const int> vars);

/// Mixed-radix index of `inst` projected onto the sorted variable list `vars`.
std::size_t projected_index(const VariableTable& table, std::span<const int> vars, const Instance& inst);

/// Inverse of projected_index: writes the digits of `index` into `inst` at `vars`.
void decode_index(const VariableTable& table, std::span<const int> vars, std::size_t index, Instance& inst);

class Structure {
public:
    Structure() = default;
    explicit Structure(int n_vars);

    /// Throws StructuralError on self-loops, out-of-range ids or cycles.
    static Structure from_parents(std::vector<std::vector<int>> parents);

    int size() const { return static_cast<int>(parents_.size()); }
    const std::vector<int>& parents(int child) const { return parents_.at(static_cast<std::size_t>(child)); }
    bool has_edge(int from, int to) const;
    int edge_count() const;

    // Edge edits keep parent lists sorted. They do not check acyclicity.
    void add_edge(int from, int to);
    void remove_edge(int from, int to);

    bool is_acyclic() const;
    /// True if `to` is reachable from `from` along directed edges.
    bool has_path(int from, int to) const;
    std::vector<int> topological_order() const;

    auto operator<=>(const Structure&) const = default;

private:
    std::vector<std::vector<int>> parents_;
};

struct Cpt {
    int child = 0;
    std::vector<int> parents;
    int child_cardinality = 2;
    /// rows() * child_cardinality probabilities, row-major by parent configuration.
    std::vector<double> table;

    std::size_t rows() const { return table.size() / static_cast<std::size_t>(child_cardinality); }
    std::span<const double> row(std::size_t config) const
    {
        return {table.data() + config * static_cast<std::size_t>(child_cardinality),
                static_cast<std::size_t>(child_cardinality)};
    }
};

class BayesianNetwork {
public:
    BayesianNetwork() = default;
    /// Validates CPT shapes, parent lists and row normalization (1e-9).
    BayesianNetwork(VariableTable vars, Structure structure, std::vector<Cpt> cpts);

    static BayesianNetwork uniform(VariableTable vars, Structure structure);

    const VariableTable& variables() const { return vars_; }
    const Structure& structure() const { return structure_; }
    const Cpt& cpt(int child) const { return cpts_.at(static_cast<std::size_t>(child)); }
    int size() const { return vars_.size(); }

    /// theta_{x_child | pa(x_child)} read from a complete instance.
    double conditional(int child, const Instance& inst) const;

    /// Natural-log joint probability; -inf when any factor is zero.
    double joint_log_prob(const Instance& inst) const;
    double joint_prob(const Instance& inst) const;

    Instance sample(Rng& rng) const;

    /// P(target | evidence) by enumeration. `target` is a list of (variable, value).
    /// Throws ZeroEvidenceError when P(evidence) = 0.
    double marginal_conditional(std::span<const std::pair<int, int>> target,
                                const PartialInstance& evidence) const;

    /// Calls `fn(completion, P(completion))` for every completion of `evidence`.
    /// Returns P(evidence).
    double for_each_completion(const PartialInstance& evidence,
                               const std::function<void(const Instance&, double)>& fn) const;

    /// Full joint distribution in mixed radix over all variables (variable 0 fastest).
    std::vector<double> joint_table() const;

    /// Joint marginal over the sorted variable list `vars`, in mixed radix order.
    std::vector<double> marginal(std::span<const int> vars) const;

    /// Number of stored CPT entries.
    std::size_t parameter_count() const;

private:
    void check_instance(const Instance& inst) const;

    VariableTable vars_;
    Structure structure_;
    std::vector<Cpt> cpts_;
    std::vector<int> order_;
};

/// Upper bound on the number of completions enumerated by a single inference call.
inline constexpr std::size_t kMaxEnumeration = std::size_t{1} << 24;

} // namespace seqbn
