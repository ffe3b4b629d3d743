#pragma once

// Incremental EM over expected sufficient statistics, combined with the
// incremental structure learner. Every instance, each record is decayed by
// alpha and receives the posterior P_B(x | y) of its cells under the current
// model; every k instances the structure is re-selected from the expected
// records exactly as the complete-data incremental learner does.

#include <cstdint>

#include "seqbn/bn.hpp"
#include "seqbn/learners.hpp"
#include "seqbn/statstore.hpp"

namespace seqbn {

struct EmConfig {
    /// Pseudo-instances of the current model used to seed records.
    double n0 = 10.0;
    /// Decay applied to old expected counts, in (0, 1].
    double alpha = 0.99;
    LearnerConfig learner = [] {
        LearnerConfig c;
        c.strategy = Strategy::Em;
        return c;
    }();
};

void validate(const EmConfig& cfg);

/// Sets every record to n0 * P_B(key) and its absorbed weight to n0.
void init_expected(StatisticsStore& store, const BayesianNetwork& model, double n0);

/// Seeds one record with n0 * P_B(key).
void seed_record(StatisticsRecord& rec, const BayesianNetwork& model, double n0);

/// N(x) <- alpha * N(x) + P_B(x | y) for every record and cell;
/// absorbed <- alpha * absorbed + 1. Returns false, leaving the store
/// untouched, when P_B(y) = 0.
bool em_absorb(StatisticsStore& store, const PartialInstance& y, const BayesianNetwork& model, double alpha);

class EmLearner final : public SequentialLearner {
public:
    EmLearner(const BayesianNetwork& initial, EmConfig cfg);

    const BayesianNetwork& step(const Instance& inst) override;
    const BayesianNetwork& step(const PartialInstance& inst) override;
    std::size_t memory_units() const override { return store_.memory_units(); }

    const StatisticsStore& store() const { return store_; }
    const Frontier& frontier() const { return frontier_; }
    std::int64_t skipped() const { return skipped_; }

private:
    EmConfig em_;
    StatisticsStore store_;
    Frontier frontier_;
    std::int64_t skipped_ = 0;
};

} // namespace seqbn
