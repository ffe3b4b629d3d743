#pragma once

// Sequential structure learners. Each consumes a read-once stream, refreshes
// its parameters after every instance and reconsiders the structure every k
// instances:
//
//   NaiveLearner        keeps every instance and re-runs hill climbing on all of them.
//   MapLearner          keeps the last window only; the previous model, weighted by
//                       the instances it summarizes, acts as the BDe prior.
//   IncrementalLearner  keeps sufficient statistics for the search frontier of the
//                       current structure and searches what those records can score.

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "seqbn/bn.hpp"
#include "seqbn/scoring.hpp"
#include "seqbn/search.hpp"
#include "seqbn/statstore.hpp"

namespace seqbn {

enum class Strategy { Naive, Map, Incremental, Em };

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view name);

struct LearnerConfig {
    Strategy strategy = Strategy::Incremental;
    /// Structure-update interval.
    int k = 100;
    ScoreConfig score;
    /// Uniform Dirichlet smoothing used for emitted parameters.
    double prior_ess = 5.0;
    int frontier_width = 1;
    int max_parents = kDefaultMaxParents;
    /// MAP only: cap on the prior network's equivalent sample size.
    std::optional<double> map_weight_cap;
};

/// The score each strategy uses when none is chosen explicitly.
ScoreKind default_score(Strategy s);

void validate(const LearnerConfig& cfg);

struct StructureUpdate {
    std::int64_t n = 0;
    Structure structure;
};

class SequentialLearner {
public:
    virtual ~SequentialLearner() = default;

    /// Absorbs one complete instance and returns the model for the next one.
    virtual const BayesianNetwork& step(const Instance& inst) = 0;
    /// Partial instances are only accepted by learners that handle missing data.
    virtual const BayesianNetwork& step(const PartialInstance& inst);

    const BayesianNetwork& current() const { return model_; }
    std::int64_t instances_seen() const { return n_; }
    const LearnerConfig& config() const { return cfg_; }
    /// Structure chosen at every decision point (n mod k == 0).
    const std::vector<StructureUpdate>& history() const { return history_; }

    /// Stored numbers retained about past data.
    virtual std::size_t memory_units() const = 0;

protected:
    SequentialLearner(const BayesianNetwork& initial, LearnerConfig cfg);

    void check(const Instance& inst) const;
    bool decision_point() const { return n_ % cfg_.k == 0; }
    void record_decision(const Structure& g) { history_.push_back({n_, g}); }

    LearnerConfig cfg_;
    VariableTable vars_;
    BayesianNetwork model_;
    std::int64_t n_ = 0;
    std::vector<StructureUpdate> history_;
};

class NaiveLearner final : public SequentialLearner {
public:
    NaiveLearner(const BayesianNetwork& initial, LearnerConfig cfg);

    const BayesianNetwork& step(const Instance& inst) override;
    using SequentialLearner::step;
    std::size_t memory_units() const override;

    const std::vector<Instance>& buffer() const { return buffer_; }

private:
    std::vector<Instance> buffer_;
    StatisticsStore family_counts_;
};

/// Hill climbing over batch counts of `data`, computed on demand per family.
Structure naive_update(const Structure& start, const VariableTable& vars, std::span<const Instance> data,
                       const ScoreConfig& score, int max_parents = kDefaultMaxParents);

class MapLearner final : public SequentialLearner {
public:
    MapLearner(const BayesianNetwork& initial, LearnerConfig cfg);

    const BayesianNetwork& step(const Instance& inst) override;
    using SequentialLearner::step;
    std::size_t memory_units() const override;

    const PriorNetwork& prior() const { return *prior_; }
    std::size_t buffered() const { return buffer_.size(); }

private:
    void reset_window();
    void refresh_parameters();

    std::shared_ptr<const PriorNetwork> prior_;
    std::vector<Instance> buffer_;
    StatisticsStore window_counts_;
    std::vector<std::vector<double>> pseudo_;
};

struct MapUpdate {
    Structure structure;
    std::shared_ptr<const PriorNetwork> prior;
};

/// One MAP window: BDe with hyperparameters ess/cells + prior pseudo-counts,
/// hill climbing from `start`, then the posterior-mean network of the winner
/// becomes the next prior with weight prior.weight() + buffer size (capped).
MapUpdate map_update(const Structure& start, const PriorNetwork& prior, std::span<const Instance> buffer,
                     const LearnerConfig& cfg);

class IncrementalLearner final : public SequentialLearner {
public:
    IncrementalLearner(const BayesianNetwork& initial, LearnerConfig cfg);

    const BayesianNetwork& step(const Instance& inst) override;
    using SequentialLearner::step;
    std::size_t memory_units() const override { return store_.memory_units(); }

    const StatisticsStore& store() const { return store_; }
    const Frontier& frontier() const { return frontier_; }

private:
    StatisticsStore store_;
    Frontier frontier_;
};

/// Re-selects the structure over Nets(S), recomputes the frontier and
/// retargets the store to the frontier's keys. Returns the new structure.
Structure incremental_update(const Structure& current, StatisticsStore& store, Frontier& frontier,
                             const LearnerConfig& cfg,
                             const std::function<void(StatisticsRecord&)>& init_fresh = {});

} // namespace seqbn
