#include "seqbn/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "seqbn/errors.hpp"

namespace seqbn {

std::string_view to_string(ScoreKind kind)
{
    switch (kind) {
    case ScoreKind::Mdl: return "mdl";
    case ScoreKind::Bde: return "bde";
    case ScoreKind::AvgMdl: return "avg-mdl";
    case ScoreKind::AvgBde: return "avg-bde";
    }
    return "?";
}

ScoreKind parse_score_kind(std::string_view name)
{
    if (name == "mdl") return ScoreKind::Mdl;
    if (name == "bde") return ScoreKind::Bde;
    if (name == "avg-mdl") return ScoreKind::AvgMdl;
    if (name == "avg-bde") return ScoreKind::AvgBde;
    throw ConfigError("unknown score '" + std::string(name) + "'");
}

PriorNetwork::PriorNetwork(BayesianNetwork net, double weight)
    : net_(std::move(net)), weight_(weight), joint_(net_.joint_table()), all_vars_(static_cast<std::size_t>(net_.size()))
{
    if (!(weight >= 0.0))
        throw ConfigError("prior weight must be non-negative");
    std::iota(all_vars_.begin(), all_vars_.end(), 0);
}

std::vector<double> PriorNetwork::pseudo_counts(const FamilyKey& key) const
{
    const auto& vars = net_.variables();
    std::vector<double> out(joint_state_count(vars, key.vars()), 0.0);
    Instance scratch(all_vars_.size(), 0);
    for (std::size_t idx = 0; idx < joint_.size(); ++idx) {
        decode_index(vars, all_vars_, idx, scratch);
        out[projected_index(vars, key.vars(), scratch)] += joint_[idx];
    }
    for (double& v : out)
        v *= weight_;
    return out;
}

void validate(const ScoreConfig& cfg)
{
    if (!(cfg.ess > 0.0) && !cfg.prior)
        throw ConfigError("equivalent sample size must be positive");
    if (cfg.ess < 0.0)
        throw ConfigError("equivalent sample size must be non-negative");
}

std::vector<double> dirichlet_hyperparameters(const VariableTable& vars, const FamilyKey& key, const ScoreConfig& cfg)
{
    validate(cfg);
    const std::size_t cells = joint_state_count(vars, key.vars());
    std::vector<double> alpha(cells, cfg.ess / static_cast<double>(cells));
    if (cfg.prior) {
        const auto pseudo = cfg.prior->pseudo_counts(key);
        for (std::size_t i = 0; i < cells; ++i)
            alpha[i] += pseudo[i];
    }
    for (double& a : alpha)
        a = std::max(a, kHyperparameterFloor);
    return alpha;
}

std::vector<double> family_layout(const VariableTable& vars, int child, const FamilyKey& key,
                                  std::span<const double> cells)
{
    if (!key.contains(child))
        throw StructuralError("family key {" + key.csv() + "} does not contain the child");
    std::size_t stride = 1;
    for (int v : key.vars()) {
        if (v == child)
            break;
        stride *= static_cast<std::size_t>(vars.cardinality(v));
    }
    const auto r = static_cast<std::size_t>(vars.cardinality(child));
    std::vector<double> out(cells.size());
    for (std::size_t idx = 0; idx < cells.size(); ++idx) {
        const std::size_t x = (idx / stride) % r;
        const std::size_t pa = idx % stride + (idx / (stride * r)) * stride;
        out[pa * r + x] = cells[idx];
    }
    return out;
}

double parameter_count(const VariableTable& vars, int child, const FamilyKey& key)
{
    const double q = static_cast<double>(joint_state_count(vars, key.vars())) / vars.cardinality(child);
    return (vars.cardinality(child) - 1) * q;
}

double local_mdl(const VariableTable& vars, int child, const StatisticsRecord& rec)
{
    const double n = rec.absorbed;
    if (n <= 0.0)
        return 0.0;
    const auto table = family_layout(vars, child, rec.key, rec.counts);
    const auto r = static_cast<std::size_t>(vars.cardinality(child));
    double encoding = 0.0; // N * H(child | parents) in bits
    for (std::size_t row = 0; row < table.size() / r; ++row) {
        double n_pa = 0.0;
        for (std::size_t x = 0; x < r; ++x)
            n_pa += table[row * r + x];
        for (std::size_t x = 0; x < r; ++x) {
            const double c = table[row * r + x];
            if (c > 0.0)
                encoding -= c * std::log2(c / n_pa);
        }
    }
    const double log_n = n > 1.0 ? std::log2(n) : 0.0;
    return -(encoding + 0.5 * log_n * parameter_count(vars, child, rec.key));
}

double local_bde(const VariableTable& vars, int child, const StatisticsRecord& rec, const ScoreConfig& cfg)
{
    const auto alpha = family_layout(vars, child, rec.key, dirichlet_hyperparameters(vars, rec.key, cfg));
    const auto counts = family_layout(vars, child, rec.key, rec.counts);
    const auto r = static_cast<std::size_t>(vars.cardinality(child));
    double score = 0.0;
    for (std::size_t row = 0; row < counts.size() / r; ++row) {
        double alpha_pa = 0.0;
        double n_pa = 0.0;
        for (std::size_t x = 0; x < r; ++x) {
            const double a = alpha[row * r + x];
            const double c = counts[row * r + x];
            alpha_pa += a;
            n_pa += c;
            if (c > 0.0)
                score += std::lgamma(a + c) - std::lgamma(a);
        }
        if (n_pa > 0.0)
            score += std::lgamma(alpha_pa) - std::lgamma(alpha_pa + n_pa);
    }
    return score;
}

double local_avg(const VariableTable& vars, int child, const StatisticsRecord& rec, ScoreKind base,
                 const ScoreConfig& cfg)
{
    const double n = rec.absorbed;
    const bool bde = base == ScoreKind::Bde || base == ScoreKind::AvgBde;
    if (n > 0.0)
        return (bde ? local_bde(vars, child, rec, cfg) : local_mdl(vars, child, rec)) / n;
    if (!bde)
        return 0.0;
    // Log prior predictive of one instance, averaged over a uniform choice of cell.
    const auto alpha = family_layout(vars, child, rec.key, dirichlet_hyperparameters(vars, rec.key, cfg));
    const auto r = static_cast<std::size_t>(vars.cardinality(child));
    double total = 0.0;
    for (std::size_t row = 0; row < alpha.size() / r; ++row) {
        const double alpha_pa = std::accumulate(alpha.begin() + static_cast<std::ptrdiff_t>(row * r),
                                                alpha.begin() + static_cast<std::ptrdiff_t>((row + 1) * r), 0.0);
        for (std::size_t x = 0; x < r; ++x)
            total += std::log(alpha[row * r + x] / alpha_pa);
    }
    return total / static_cast<double>(alpha.size());
}

double local_score(const VariableTable& vars, int child, const StatisticsRecord& rec, const ScoreConfig& cfg)
{
    switch (cfg.kind) {
    case ScoreKind::Mdl: return local_mdl(vars, child, rec);
    case ScoreKind::Bde: return local_bde(vars, child, rec, cfg);
    case ScoreKind::AvgMdl: return local_avg(vars, child, rec, ScoreKind::Mdl, cfg);
    case ScoreKind::AvgBde: return local_avg(vars, child, rec, ScoreKind::Bde, cfg);
    }
    return 0.0;
}

std::optional<double> local_score(const StatisticsStore& store, int child, std::span<const int> parents,
                                  const ScoreConfig& cfg)
{
    const auto rec = store.lookup(FamilyKey::family(child, parents));
    if (!rec)
        return std::nullopt;
    return local_score(store.variables(), child, *rec, cfg);
}

double total_score(const Structure& g, const StatisticsStore& store, const ScoreConfig& cfg)
{
    double total = 0.0;
    for (int i = 0; i < g.size(); ++i) {
        const auto s = local_score(store, i, g.parents(i), cfg);
        if (!s) {
            const auto key = FamilyKey::family(i, g.parents(i));
            throw EvaluationError("no statistics for the family of variable " + std::to_string(i) + " {" +
                                  key.csv() + "}");
        }
        total += *s;
    }
    return total;
}

Cpt estimate_cpt(const VariableTable& vars, int child, const StatisticsRecord& rec, double prior_ess,
                 std::span<const double> pseudo)
{
    if (prior_ess < 0.0)
        throw ConfigError("prior_ess must be non-negative");
    Cpt cpt;
    cpt.child = child;
    for (int v : rec.key.vars())
        if (v != child)
            cpt.parents.push_back(v);
    cpt.child_cardinality = vars.cardinality(child);
    const auto r = static_cast<std::size_t>(cpt.child_cardinality);
    auto table = family_layout(vars, child, rec.key, rec.counts);
    if (!pseudo.empty()) {
        const auto extra = family_layout(vars, child, rec.key, pseudo);
        for (std::size_t i = 0; i < table.size(); ++i)
            table[i] += extra[i];
    }
    const double cell_prior = prior_ess / static_cast<double>(table.size());
    for (std::size_t row = 0; row < table.size() / r; ++row) {
        double total = 0.0;
        for (std::size_t x = 0; x < r; ++x)
            total += table[row * r + x] + cell_prior;
        for (std::size_t x = 0; x < r; ++x) {
            double& cell = table[row * r + x];
            cell = total > 0.0 ? (cell + cell_prior) / total : 1.0 / static_cast<double>(r);
        }
        // Exact renormalization so rows pass the 1e-9 check regardless of rounding.
        double sum = 0.0;
        for (std::size_t x = 0; x < r; ++x)
            sum += table[row * r + x];
        for (std::size_t x = 0; x < r; ++x)
            table[row * r + x] /= sum;
    }
    cpt.table = std::move(table);
    return cpt;
}

BayesianNetwork mle_parameters(const Structure& g, const StatisticsStore& store, double prior_ess)
{
    const auto& vars = store.variables();
    std::vector<Cpt> cpts;
    cpts.reserve(static_cast<std::size_t>(g.size()));
    for (int i = 0; i < g.size(); ++i) {
        const auto key = FamilyKey::family(i, g.parents(i));
        const auto rec = store.lookup(key);
        if (!rec)
            throw EvaluationError("no statistics for the family of variable " + std::to_string(i) + " {" +
                                  key.csv() + "}");
        cpts.push_back(estimate_cpt(vars, i, *rec, prior_ess));
    }
    return BayesianNetwork(vars, g, std::move(cpts));
}

} // namespace seqbn
