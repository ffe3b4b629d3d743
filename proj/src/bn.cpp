#include "seqbn/bn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "seqbn/errors.hpp"

namespace seqbn {

VariableTable::VariableTable(std::vector<Variable> vars) : vars_(std::move(vars))
{
    std::set<std::string_view> names;
    for (const auto& v : vars_) {
        if (v.cardinality < 2)
            throw StructuralError("variable '" + v.name + "' needs cardinality >= 2");
        if (v.name.empty())
            throw StructuralError("variable names must be non-empty");
        if (!names.insert(v.name).second)
            throw StructuralError("duplicate variable name '" + v.name + "'");
    }
}

std::vector<int> VariableTable::cardinalities() const
{
    std::vector<int> cards;
    cards.reserve(vars_.size());
    for (const auto& v : vars_)
        cards.push_back(v.cardinality);
    return cards;
}

std::optional<int> VariableTable::find(std::string_view name) const
{
    for (std::size_t i = 0; i < vars_.size(); ++i)
        if (vars_[i].name == name)
            return static_cast<int>(i);
    return std::nullopt;
}

std::size_t joint_state_count(const VariableTable& table, std::span<const int> vars)
{
    std::size_t count = 1;
    for (int v : vars)
        count *= static_cast<std::size_t>(table.cardinality(v));
    return count;
}

std::size_t projected_index(const VariableTable& table, std::span<const int> vars, const Instance& inst)
{
    std::size_t index = 0;
    std::size_t stride = 1;
    for (int v : vars) {
        index += stride * static_cast<std::size_t>(inst[static_cast<std::size_t>(v)]);
        stride *= static_cast<std::size_t>(table.cardinality(v));
    }
    return index;
}

void decode_index(const VariableTable& table, std::span<const int> vars, std::size_t index, Instance& inst)
{
    for (int v : vars) {
        const auto card = static_cast<std::size_t>(table.cardinality(v));
        inst[static_cast<std::size_t>(v)] = static_cast<int>(index % card);
        index /= card;
    }
}

// ---------------------------------------------------------------------------
// Structure

Structure::Structure(int n_vars) : parents_(static_cast<std::size_t>(n_vars)) {}

Structure Structure::from_parents(std::vector<std::vector<int>> parents)
{
    Structure g;
    const int n = static_cast<int>(parents.size());
    for (int child = 0; child < n; ++child) {
        auto& pa = parents[static_cast<std::size_t>(child)];
        std::sort(pa.begin(), pa.end());
        if (std::adjacent_find(pa.begin(), pa.end()) != pa.end())
            throw StructuralError("duplicate parent for variable " + std::to_string(child));
        for (int p : pa) {
            if (p < 0 || p >= n)
                throw StructuralError("parent id out of range");
            if (p == child)
                throw StructuralError("variable " + std::to_string(child) + " is its own parent");
        }
    }
    g.parents_ = std::move(parents);
    if (!g.is_acyclic())
        throw StructuralError("structure contains a directed cycle");
    return g;
}

bool Structure::has_edge(int from, int to) const
{
    const auto& pa = parents(to);
    return std::binary_search(pa.begin(), pa.end(), from);
}

int Structure::edge_count() const
{
    int count = 0;
    for (const auto& pa : parents_)
        count += static_cast<int>(pa.size());
    return count;
}

void Structure::add_edge(int from, int to)
{
    auto& pa = parents_.at(static_cast<std::size_t>(to));
    auto it = std::lower_bound(pa.begin(), pa.end(), from);
    if (it == pa.end() || *it != from)
        pa.insert(it, from);
}

void Structure::remove_edge(int from, int to)
{
    auto& pa = parents_.at(static_cast<std::size_t>(to));
    auto it = std::lower_bound(pa.begin(), pa.end(), from);
    if (it != pa.end() && *it == from)
        pa.erase(it);
}

bool Structure::has_path(int from, int to) const
{
    // Walk backwards from `to` through parent links.
    std::vector<char> seen(parents_.size(), 0);
    std::vector<int> stack{to};
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        if (v == from)
            return true;
        if (seen[static_cast<std::size_t>(v)])
            continue;
        seen[static_cast<std::size_t>(v)] = 1;
        for (int p : parents(v))
            stack.push_back(p);
    }
    return false;
}

std::vector<int> Structure::topological_order() const
{
    const std::size_t n = parents_.size();
    std::vector<int> pending(n);
    std::vector<std::vector<int>> children(n);
    for (std::size_t c = 0; c < n; ++c) {
        pending[c] = static_cast<int>(parents_[c].size());
        for (int p : parents_[c])
            children[static_cast<std::size_t>(p)].push_back(static_cast<int>(c));
    }
    std::vector<int> order;
    order.reserve(n);
    for (std::size_t v = 0; v < n; ++v)
        if (pending[v] == 0)
            order.push_back(static_cast<int>(v));
    for (std::size_t head = 0; head < order.size(); ++head)
        for (int c : children[static_cast<std::size_t>(order[head])])
            if (--pending[static_cast<std::size_t>(c)] == 0)
                order.push_back(c);
    if (order.size() != n)
        throw StructuralError("structure contains a directed cycle");
    return order;
}

bool Structure::is_acyclic() const
{
    try {
        topological_order();
        return true;
    } catch (const StructuralError&) {
        return false;
    }
}

// ---------------------------------------------------------------------------
// BayesianNetwork

BayesianNetwork::BayesianNetwork(VariableTable vars, Structure structure, std::vector<Cpt> cpts)
    : vars_(std::move(vars)), structure_(std::move(structure)), cpts_(std::move(cpts))
{
    const int n = vars_.size();
    if (structure_.size() != n || static_cast<int>(cpts_.size()) != n)
        throw StructuralError("network components disagree on the number of variables");
    order_ = structure_.topological_order();
    for (int i = 0; i < n; ++i) {
        const Cpt& c = cpts_[static_cast<std::size_t>(i)];
        if (c.child != i || c.parents != structure_.parents(i))
            throw StructuralError("CPT for '" + vars_[i].name + "' does not match the structure");
        if (c.child_cardinality != vars_.cardinality(i))
            throw StructuralError("CPT for '" + vars_[i].name + "' has the wrong child cardinality");
        const std::size_t rows = joint_state_count(vars_, c.parents);
        if (c.table.size() != rows * static_cast<std::size_t>(c.child_cardinality))
            throw StructuralError("CPT for '" + vars_[i].name + "' has the wrong number of entries");
        for (std::size_t r = 0; r < rows; ++r) {
            double sum = 0.0;
            for (double p : c.row(r)) {
                if (!(p >= 0.0 && p <= 1.0))
                    throw StructuralError("CPT entry outside [0, 1] for '" + vars_[i].name + "'");
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-9)
                throw StructuralError("CPT row does not sum to 1 for '" + vars_[i].name + "'");
        }
    }
}

BayesianNetwork BayesianNetwork::uniform(VariableTable vars, Structure structure)
{
    std::vector<Cpt> cpts;
    for (int i = 0; i < vars.size(); ++i) {
        Cpt c;
        c.child = i;
        c.parents = structure.parents(i);
        c.child_cardinality = vars.cardinality(i);
        const std::size_t rows = joint_state_count(vars, c.parents);
        c.table.assign(rows * static_cast<std::size_t>(c.child_cardinality), 1.0 / c.child_cardinality);
        cpts.push_back(std::move(c));
    }
    return BayesianNetwork(std::move(vars), std::move(structure), std::move(cpts));
}

void BayesianNetwork::check_instance(const Instance& inst) const
{
    if (static_cast<int>(inst.size()) != vars_.size())
        throw StructuralError("instance has " + std::to_string(inst.size()) + " values, network has " +
                              std::to_string(vars_.size()) + " variables");
    for (int i = 0; i < vars_.size(); ++i) {
        const int v = inst[static_cast<std::size_t>(i)];
        if (v < 0 || v >= vars_.cardinality(i))
            throw StructuralError("value out of range for '" + vars_[i].name + "'");
    }
}

double BayesianNetwork::conditional(int child, const Instance& inst) const
{
    const Cpt& c = cpt(child);
    return c.row(projected_index(vars_, c.parents, inst))[static_cast<std::size_t>(inst[static_cast<std::size_t>(child)])];
}

double BayesianNetwork::joint_log_prob(const Instance& inst) const
{
    check_instance(inst);
    double lp = 0.0;
    for (int i = 0; i < vars_.size(); ++i) {
        const double p = conditional(i, inst);
        if (p <= 0.0)
            return -std::numeric_limits<double>::infinity();
        lp += std::log(p);
    }
    return lp;
}

double BayesianNetwork::joint_prob(const Instance& inst) const
{
    double p = 1.0;
    for (int i = 0; i < vars_.size() && p > 0.0; ++i)
        p *= conditional(i, inst);
    return p;
}

Instance BayesianNetwork::sample(Rng& rng) const
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Instance inst(static_cast<std::size_t>(vars_.size()), 0);
    for (int v : order_) {
        const Cpt& c = cpt(v);
        const auto row = c.row(projected_index(vars_, c.parents, inst));
        const double u = unit(rng);
        double acc = 0.0;
        int value = c.child_cardinality - 1;
        for (int x = 0; x < c.child_cardinality; ++x) {
            acc += row[static_cast<std::size_t>(x)];
            if (u < acc) {
                value = x;
                break;
            }
        }
        // Guard against rounding putting mass on a zero-probability tail value.
        while (row[static_cast<std::size_t>(value)] == 0.0 && value > 0)
            --value;
        inst[static_cast<std::size_t>(v)] = value;
    }
    return inst;
}

double BayesianNetwork::for_each_completion(const PartialInstance& evidence,
                                            const std::function<void(const Instance&, double)>& fn) const
{
    if (static_cast<int>(evidence.size()) != vars_.size())
        throw StructuralError("evidence dimension does not match the network");
    Instance inst(evidence.size(), 0);
    std::vector<int> hidden;
    for (int i = 0; i < vars_.size(); ++i) {
        const auto& e = evidence[static_cast<std::size_t>(i)];
        if (e) {
            if (*e < 0 || *e >= vars_.cardinality(i))
                throw StructuralError("evidence value out of range for '" + vars_[i].name + "'");
            inst[static_cast<std::size_t>(i)] = *e;
        } else {
            hidden.push_back(i);
        }
    }
    const std::size_t completions = joint_state_count(vars_, hidden);
    if (completions > kMaxEnumeration)
        throw StructuralError("enumeration over " + std::to_string(completions) + " completions exceeds the limit");
    double total = 0.0;
    for (std::size_t idx = 0; idx < completions; ++idx) {
        decode_index(vars_, hidden, idx, inst);
        const double p = joint_prob(inst);
        total += p;
        fn(inst, p);
    }
    return total;
}

double BayesianNetwork::marginal_conditional(std::span<const std::pair<int, int>> target,
                                             const PartialInstance& evidence) const
{
    double joint = 0.0;
    const double pe = for_each_completion(evidence, [&](const Instance& inst, double p) {
        for (const auto& [var, value] : target)
            if (inst.at(static_cast<std::size_t>(var)) != value)
                return;
        joint += p;
    });
    if (pe <= 0.0)
        throw ZeroEvidenceError("evidence has probability zero");
    return joint / pe;
}

std::vector<double> BayesianNetwork::joint_table() const
{
    std::vector<int> all(static_cast<std::size_t>(vars_.size()));
    std::iota(all.begin(), all.end(), 0);
    const std::size_t states = joint_state_count(vars_, all);
    if (states > kMaxEnumeration)
        throw StructuralError("joint table too large to enumerate");
    std::vector<double> joint(states);
    Instance inst(all.size(), 0);
    for (std::size_t idx = 0; idx < states; ++idx) {
        decode_index(vars_, all, idx, inst);
        joint[idx] = joint_prob(inst);
    }
    return joint;
}

std::vector<double> BayesianNetwork::marginal(std::span<const int> vars) const
{
    std::vector<double> out(joint_state_count(vars_, vars), 0.0);
    const PartialInstance none(static_cast<std::size_t>(vars_.size()));
    for_each_completion(none, [&](const Instance& inst, double p) { out[projected_index(vars_, vars, inst)] += p; });
    return out;
}

std::size_t BayesianNetwork::parameter_count() const
{
    std::size_t n = 0;
    for (const auto& c : cpts_)
        n += c.table.size();
    return n;
}

} // namespace seqbn
