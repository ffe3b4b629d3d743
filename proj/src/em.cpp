#include "seqbn/em.hpp"

#include <spdlog/spdlog.h>

#include "seqbn/errors.hpp"
#include "seqbn/scoring.hpp"

namespace seqbn {

void validate(const EmConfig& cfg)
{
    if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0))
        throw ConfigError("alpha must lie in (0, 1]");
    if (!(cfg.n0 >= 0.0))
        throw ConfigError("n0 must be non-negative");
    validate(cfg.learner);
}

void seed_record(StatisticsRecord& rec, const BayesianNetwork& model, double n0)
{
    rec.counts = model.marginal(rec.key.vars());
    for (double& c : rec.counts)
        c *= n0;
    rec.absorbed = n0;
}

void init_expected(StatisticsStore& store, const BayesianNetwork& model, double n0)
{
    std::vector<StatisticsRecord> seeded;
    for (const auto& [key, rec] : store.records()) {
        seeded.push_back(rec);
        seed_record(seeded.back(), model, n0);
    }
    for (auto& rec : seeded)
        store.insert(std::move(rec));
}

bool em_absorb(StatisticsStore& store, const PartialInstance& y, const BayesianNetwork& model, double alpha)
{
    std::vector<std::pair<Instance, double>> completions;
    const double evidence = model.for_each_completion(y, [&](const Instance& inst, double p) {
        if (p > 0.0)
            completions.emplace_back(inst, p);
    });
    if (!(evidence > 0.0))
        return false;
    const VariableTable& vars = store.variables();
    store.update_each([&](StatisticsRecord& rec) {
        if (alpha != 1.0) {
            for (double& c : rec.counts)
                c *= alpha;
        }
        for (const auto& [inst, p] : completions)
            rec.counts[projected_index(vars, rec.key.vars(), inst)] += p / evidence;
        rec.absorbed = rec.absorbed * alpha + 1.0;
    });
    return true;
}

EmLearner::EmLearner(const BayesianNetwork& initial, EmConfig cfg)
    : SequentialLearner(initial, cfg.learner), em_(std::move(cfg)), store_(vars_),
      frontier_(compute_frontier(initial.structure(), cfg_.max_parents))
{
    validate(em_);
    store_.retarget(frontier_.keys());
    init_expected(store_, model_, em_.n0);
}

const BayesianNetwork& EmLearner::step(const Instance& inst)
{
    check(inst);
    PartialInstance y(inst.begin(), inst.end());
    return step(y);
}

const BayesianNetwork& EmLearner::step(const PartialInstance& y)
{
    if (static_cast<int>(y.size()) != vars_.size())
        throw SchemaError("instance has " + std::to_string(y.size()) + " values, expected " +
                          std::to_string(vars_.size()));
    if (!em_absorb(store_, y, model_, em_.alpha)) {
        ++skipped_;
        store_.update_each([](StatisticsRecord&) {}); // keep birth indices aligned with n
        spdlog::warn("instance {} has zero probability under the current model; skipped", n_ + 1);
    }
    ++n_;
    Structure g = model_.structure();
    if (decision_point()) {
        const BayesianNetwork& model = model_;
        const double n0 = em_.n0;
        g = incremental_update(g, store_, frontier_, cfg_,
                               [&model, n0](StatisticsRecord& rec) { seed_record(rec, model, n0); });
        record_decision(g);
    }
    model_ = mle_parameters(g, store_, cfg_.prior_ess);
    return model_;
}

} // namespace seqbn
