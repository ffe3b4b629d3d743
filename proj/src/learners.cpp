#include "seqbn/learners.hpp"

#include <algorithm>
#include <map>

#include "seqbn/errors.hpp"

namespace seqbn {

std::string_view to_string(Strategy s)
{
    switch (s) {
    case Strategy::Naive: return "naive";
    case Strategy::Map: return "map";
    case Strategy::Incremental: return "incremental";
    case Strategy::Em: return "em";
    }
    return "?";
}

Strategy parse_strategy(std::string_view name)
{
    if (name == "naive") return Strategy::Naive;
    if (name == "map") return Strategy::Map;
    if (name == "incremental") return Strategy::Incremental;
    if (name == "em") return Strategy::Em;
    throw ConfigError("unknown strategy '" + std::string(name) + "'");
}

ScoreKind default_score(Strategy s)
{
    switch (s) {
    case Strategy::Naive:
    case Strategy::Map: return ScoreKind::Bde;
    case Strategy::Incremental:
    case Strategy::Em: return ScoreKind::AvgBde;
    }
    return ScoreKind::AvgBde;
}

void validate(const LearnerConfig& cfg)
{
    if (cfg.k < 1)
        throw ConfigError("k must be at least 1");
    if (cfg.prior_ess < 0.0)
        throw ConfigError("prior_ess must be non-negative");
    if (cfg.frontier_width < 1)
        throw ConfigError("frontier width must be at least 1");
    if (cfg.max_parents < 0)
        throw ConfigError("max_parents must be non-negative");
    if (cfg.map_weight_cap && *cfg.map_weight_cap < 0.0)
        throw ConfigError("MAP weight cap must be non-negative");
    validate(cfg.score);
}

// ---------------------------------------------------------------------------

SequentialLearner::SequentialLearner(const BayesianNetwork& initial, LearnerConfig cfg)
    : cfg_(std::move(cfg)), vars_(initial.variables()), model_(initial)
{
    validate(cfg_);
}

const BayesianNetwork& SequentialLearner::step(const PartialInstance& inst)
{
    Instance complete;
    complete.reserve(inst.size());
    for (const auto& v : inst) {
        if (!v)
            throw SchemaError(std::string(to_string(cfg_.strategy)) + " learner requires complete instances");
        complete.push_back(*v);
    }
    return step(complete);
}

void SequentialLearner::check(const Instance& inst) const
{
    if (static_cast<int>(inst.size()) != vars_.size())
        throw SchemaError("instance has " + std::to_string(inst.size()) + " values, expected " +
                          std::to_string(vars_.size()));
    for (int i = 0; i < vars_.size(); ++i) {
        const int v = inst[static_cast<std::size_t>(i)];
        if (v < 0 || v >= vars_.cardinality(i))
            throw SchemaError("value " + std::to_string(v) + " out of range for '" + vars_[i].name + "'");
    }
}

// ---------------------------------------------------------------------------
// Naive

namespace {

/// Scores families from raw data, counting each family once on first use.
class BatchScorer {
public:
    BatchScorer(const VariableTable& vars, std::span<const Instance> data, const ScoreConfig& cfg)
        : vars_(vars), data_(data), cfg_(cfg)
    {
    }

    std::optional<double> operator()(int child, std::span<const int> parents)
    {
        const auto key = FamilyKey::family(child, parents);
        auto it = records_.find(key);
        if (it == records_.end())
            it = records_.emplace(key, count_records(vars_, key, data_)).first;
        return local_score(vars_, child, it->second, cfg_);
    }

private:
    const VariableTable& vars_;
    std::span<const Instance> data_;
    const ScoreConfig& cfg_;
    std::map<FamilyKey, StatisticsRecord> records_;
};

StatisticsStore count_store(const VariableTable& vars, const Structure& g, std::span<const Instance> data)
{
    StatisticsStore store(vars);
    for (const auto& key : suff(g))
        store.insert(count_records(vars, key, data));
    return store;
}

} // namespace

Structure naive_update(const Structure& start, const VariableTable& vars, std::span<const Instance> data,
                       const ScoreConfig& score, int max_parents)
{
    if (data.empty())
        return start;
    auto scorer = std::make_shared<BatchScorer>(vars, data, score);
    LocalScorer fn = [scorer](int child, std::span<const int> parents) { return (*scorer)(child, parents); };
    return hill_climb(start, fn, ClimbOptions{max_parents}).structure;
}

NaiveLearner::NaiveLearner(const BayesianNetwork& initial, LearnerConfig cfg)
    : SequentialLearner(initial, std::move(cfg)), family_counts_(count_store(vars_, initial.structure(), {}))
{
}

const BayesianNetwork& NaiveLearner::step(const Instance& inst)
{
    check(inst);
    buffer_.push_back(inst);
    family_counts_.absorb(inst);
    ++n_;
    Structure g = model_.structure();
    if (decision_point()) {
        Structure next = naive_update(g, vars_, buffer_, cfg_.score, cfg_.max_parents);
        if (next != g)
            family_counts_ = count_store(vars_, next, buffer_);
        g = std::move(next);
        record_decision(g);
    }
    model_ = mle_parameters(g, family_counts_, cfg_.prior_ess);
    return model_;
}

std::size_t NaiveLearner::memory_units() const
{
    return buffer_.size() * static_cast<std::size_t>(vars_.size());
}

// ---------------------------------------------------------------------------
// MAP

MapUpdate map_update(const Structure& start, const PriorNetwork& prior, std::span<const Instance> buffer,
                     const LearnerConfig& cfg)
{
    const VariableTable& vars = prior.network().variables();
    ScoreConfig score = cfg.score;
    score.prior = std::make_shared<PriorNetwork>(prior);
    BatchScorer batch(vars, buffer, score);
    LocalScorer fn = [&batch](int child, std::span<const int> parents) { return batch(child, parents); };
    Structure g = hill_climb(start, fn, ClimbOptions{cfg.max_parents}).structure;

    std::vector<Cpt> cpts;
    for (int i = 0; i < g.size(); ++i) {
        const auto key = FamilyKey::family(i, g.parents(i));
        cpts.push_back(estimate_cpt(vars, i, count_records(vars, key, buffer), cfg.prior_ess, prior.pseudo_counts(key)));
    }
    double weight = prior.weight() + static_cast<double>(buffer.size());
    if (cfg.map_weight_cap)
        weight = std::min(weight, *cfg.map_weight_cap);
    auto next = std::make_shared<const PriorNetwork>(BayesianNetwork(vars, g, std::move(cpts)), weight);
    return {std::move(g), std::move(next)};
}

MapLearner::MapLearner(const BayesianNetwork& initial, LearnerConfig cfg)
    : SequentialLearner(initial, std::move(cfg)),
      prior_(std::make_shared<const PriorNetwork>(initial, 0.0)),
      window_counts_(vars_)
{
    reset_window();
}

void MapLearner::reset_window()
{
    buffer_.clear();
    window_counts_ = count_store(vars_, model_.structure(), {});
    pseudo_.clear();
    const Structure& g = model_.structure();
    for (int i = 0; i < g.size(); ++i)
        pseudo_.push_back(prior_->pseudo_counts(FamilyKey::family(i, g.parents(i))));
}

void MapLearner::refresh_parameters()
{
    const Structure& g = model_.structure();
    std::vector<Cpt> cpts;
    for (int i = 0; i < g.size(); ++i) {
        const auto* rec = window_counts_.find(FamilyKey::family(i, g.parents(i)));
        cpts.push_back(estimate_cpt(vars_, i, *rec, cfg_.prior_ess, pseudo_[static_cast<std::size_t>(i)]));
    }
    model_ = BayesianNetwork(vars_, g, std::move(cpts));
}

const BayesianNetwork& MapLearner::step(const Instance& inst)
{
    check(inst);
    buffer_.push_back(inst);
    window_counts_.absorb(inst);
    ++n_;
    if (decision_point()) {
        auto update = map_update(model_.structure(), *prior_, buffer_, cfg_);
        prior_ = std::move(update.prior);
        model_ = prior_->network();
        // The window restarts empty; parameters below come from the new prior alone.
        record_decision(update.structure);
        reset_window();
    }
    refresh_parameters();
    return model_;
}

std::size_t MapLearner::memory_units() const
{
    return buffer_.size() * static_cast<std::size_t>(vars_.size()) + model_.parameter_count();
}

// ---------------------------------------------------------------------------
// Incremental

Structure incremental_update(const Structure& current, StatisticsStore& store, Frontier& frontier,
                             const LearnerConfig& cfg, const std::function<void(StatisticsRecord&)>& init_fresh)
{
    Structure g = hill_climb(current, store, cfg.score, cfg.max_parents);
    frontier = compute_frontier(g, cfg.max_parents, cfg.frontier_width, store_scorer(store, cfg.score));
    store.retarget(frontier.keys(), init_fresh);
    return g;
}

IncrementalLearner::IncrementalLearner(const BayesianNetwork& initial, LearnerConfig cfg)
    : SequentialLearner(initial, std::move(cfg)), store_(vars_),
      frontier_(compute_frontier(initial.structure(), cfg_.max_parents))
{
    store_.retarget(frontier_.keys());
}

const BayesianNetwork& IncrementalLearner::step(const Instance& inst)
{
    check(inst);
    store_.absorb(inst);
    ++n_;
    Structure g = model_.structure();
    if (decision_point()) {
        g = incremental_update(g, store_, frontier_, cfg_);
        record_decision(g);
    }
    model_ = mle_parameters(g, store_, cfg_.prior_ess);
    return model_;
}

} // namespace seqbn
