#pragma once

// Experiment driver: samples datasets from a reference network, runs every
// (strategy, k, score, dataset) cell prequentially and writes traces,
// cross-dataset window averages and a summary table.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "seqbn/bn.hpp"
#include "seqbn/em.hpp"
#include "seqbn/eval.hpp"
#include "seqbn/learners.hpp"
#include "seqbn/scoring.hpp"

namespace seqbn {

/// Builds the learner for cfg.strategy; `em` supplies alpha and n0 for the EM learner.
std::unique_ptr<SequentialLearner> make_learner(const BayesianNetwork& initial, const LearnerConfig& cfg,
                                                const EmConfig& em = {});

struct ExperimentSpec {
    std::filesystem::path network;
    int n_datasets = 5;
    std::size_t n_instances = 10'000;
    std::vector<Strategy> strategies{Strategy::Naive, Strategy::Map, Strategy::Incremental};
    std::vector<int> ks{100, 400, 800};
    /// Empty: each strategy's default score.
    std::vector<ScoreKind> scores;
    /// One per dataset; empty: base_seed + i.
    std::vector<std::uint64_t> seeds;
    std::uint64_t base_seed = 1;
    double missing = 0.0;
    double ess = 5.0;
    double alpha = 1.0;
    double n0 = 0.0;
    int max_parents = kDefaultMaxParents;
    int window = 250;
    int threads = 1;
    std::filesystem::path out = "results";
};

struct CellSummary {
    Strategy strategy = Strategy::Incremental;
    int k = 0;
    ScoreKind score = ScoreKind::AvgBde;
    /// Final-window mean normalized loss averaged over datasets (nats).
    double final_normloss = 0.0;
    std::size_t peak_memory = 0;
    int datasets_ok = 0;
    std::vector<std::string> errors;
};

struct ExperimentResult {
    std::vector<CellSummary> cells;
    bool ok = true;
};

void validate(const ExperimentSpec& spec);
std::vector<std::uint64_t> dataset_seeds(const ExperimentSpec& spec);

/// Runs the grid. Individual cell failures are recorded and the remaining
/// cells still run; result.ok is false if any cell failed.
ExperimentResult run_experiment(const ExperimentSpec& spec);

struct LearnOutcome {
    BayesianNetwork final_network;
    LossTrace trace;
};

/// Streams `data` through one learner. `initial` defaults to the empty
/// uniform network; `truth` (if given) enables the normalized-loss column,
/// which is NaN otherwise. Throws SchemaError if the dataset's variables do
/// not match `initial` or `truth`.
LearnOutcome learn_stream(const VariableTable& vars, std::span<const PartialInstance> data, const LearnerConfig& cfg,
                          const EmConfig& em, const std::optional<BayesianNetwork>& initial,
                          const std::optional<BayesianNetwork>& truth);

} // namespace seqbn
