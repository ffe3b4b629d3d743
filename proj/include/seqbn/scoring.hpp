#pragma once

// Decomposable structure scores computed from sufficient-statistics records.
// Every score is higher-is-better: MDL is returned as the negated description
// length (in bits), BDe as the log marginal likelihood (in nats). The average
// variants divide a family's score by the weight its record has absorbed, so
// families whose records started at different times can be compared.

#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "seqbn/bn.hpp"
#include "seqbn/statstore.hpp"

namespace seqbn {

enum class ScoreKind { Mdl, Bde, AvgMdl, AvgBde };

std::string_view to_string(ScoreKind kind);
/// Accepts "mdl", "bde", "avg-mdl", "avg-bde"; throws ConfigError otherwise.
ScoreKind parse_score_kind(std::string_view name);

/// Informative BDe prior: a network whose joint supplies the hyperparameter
/// shape, scaled by `weight` pseudo-instances.
class PriorNetwork {
public:
    PriorNetwork(BayesianNetwork net, double weight);

    const BayesianNetwork& network() const { return net_; }
    double weight() const { return weight_; }

    /// weight * P_prior(key) in the key's mixed-radix order.
    std::vector<double> pseudo_counts(const FamilyKey& key) const;

private:
    BayesianNetwork net_;
    double weight_;
    std::vector<double> joint_;
    std::vector<int> all_vars_;
};

struct ScoreConfig {
    ScoreKind kind = ScoreKind::AvgBde;
    /// Equivalent sample size of the uniform BDe prior.
    double ess = 5.0;
    /// Optional prior network; its pseudo-counts are added to the uniform part.
    std::shared_ptr<const PriorNetwork> prior;
};

/// Hyperparameters below this are clamped up to it.
inline constexpr double kHyperparameterFloor = 1e-6;

void validate(const ScoreConfig& cfg);

/// Dirichlet hyperparameters for each cell of `key`:
/// ess / cells + prior pseudo-counts, floored at kHyperparameterFloor.
std::vector<double> dirichlet_hyperparameters(const VariableTable& vars, const FamilyKey& key, const ScoreConfig& cfg);

/// Counts of `rec` rearranged as rows (parent configuration) x child value.
/// `rec.key` must contain `child`.
std::vector<double> family_layout(const VariableTable& vars, int child, const FamilyKey& key,
                                  std::span<const double> cells);

/// Free parameters of a family: (card(child) - 1) * prod card(parents).
double parameter_count(const VariableTable& vars, int child, const FamilyKey& key);

/// Negated MDL description length in bits. log N is taken as 0 for N <= 1.
double local_mdl(const VariableTable& vars, int child, const StatisticsRecord& rec);

/// BDe log marginal likelihood in nats.
double local_bde(const VariableTable& vars, int child, const StatisticsRecord& rec, const ScoreConfig& cfg);

/// Base score divided by rec.absorbed. At zero weight MDL gives 0 and BDe the
/// average log prior predictive of a single instance.
double local_avg(const VariableTable& vars, int child, const StatisticsRecord& rec, ScoreKind base,
                 const ScoreConfig& cfg);

/// Dispatches on cfg.kind.
double local_score(const VariableTable& vars, int child, const StatisticsRecord& rec, const ScoreConfig& cfg);

/// Local score of (child, parents) from the store, or nullopt if the family's
/// record cannot be recovered.
std::optional<double> local_score(const StatisticsStore& store, int child, std::span<const int> parents,
                                  const ScoreConfig& cfg);

/// Sum of local scores; throws EvaluationError naming a missing family.
double total_score(const Structure& g, const StatisticsStore& store, const ScoreConfig& cfg);

/// theta_{x|pa} = (N(x,pa) + pseudo(x,pa) + ess/(r q)) / (N(pa) + pseudo(pa) + ess/q).
/// `pseudo` is optional, in the record key's layout.
Cpt estimate_cpt(const VariableTable& vars, int child, const StatisticsRecord& rec, double prior_ess,
                 std::span<const double> pseudo = {});

/// Parameters for g from the store, smoothed by a uniform prior of weight prior_ess.
BayesianNetwork mle_parameters(const Structure& g, const StatisticsStore& store, double prior_ess);

} // namespace seqbn
