#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "seqbn/bn.hpp"
#include "seqbn/learners.hpp"

namespace seqbn {

/// log P*(u) - log P_model(u) in nats. +inf when the model gives u zero mass.
double normalized_loss_term(const BayesianNetwork& pstar, const BayesianNetwork& model, const Instance& u);

/// D(p || q) in nats, by enumerating every joint state.
double kl_divergence(const BayesianNetwork& p, const BayesianNetwork& q);

/// The parameterization of g closest to pstar in KL: theta = P*(x | pa).
BayesianNetwork project(const BayesianNetwork& pstar, const Structure& g);

/// min over parameters of D(P* || P_(g, theta)).
double inherent_error(const BayesianNetwork& pstar, const Structure& g);

struct TraceEntry {
    std::int64_t n = 0;
    /// -ln P_{B_n}(u_n): loss of the model emitted before u_n was absorbed.
    double logloss = 0.0;
    double normloss = 0.0;
    std::size_t memory = 0;
};

struct LossTrace {
    std::vector<TraceEntry> entries;
};

struct WindowMean {
    std::int64_t start = 0;
    double mean = 0.0;
    std::size_t count = 0;
    bool partial = false;
};

/// Non-overlapping window means of the normalized-loss column. A trailing
/// window shorter than `window` is kept and flagged partial.
std::vector<WindowMean> windowed_average(const LossTrace& trace, int window = 250);

/// Feeds `stream` to `learner`, scoring each instance with the model emitted
/// before it was absorbed. `observed`, when non-empty, is what the learner
/// sees (possibly with missing values); losses are always taken on `stream`.
LossTrace prequential_trace(SequentialLearner& learner, std::span<const Instance> stream,
                            const BayesianNetwork& pstar, std::span<const PartialInstance> observed = {});

/// `# format=1`, then `n,logloss,normloss,memory`.
void write_trace_csv(std::ostream& out, const LossTrace& trace);
/// `# format=1`, then `window_start,mean_normloss`.
void write_window_csv(std::ostream& out, std::span<const WindowMean> windows);

} // namespace seqbn
