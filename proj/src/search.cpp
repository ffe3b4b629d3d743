#include "seqbn/search.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "seqbn/errors.hpp"

namespace seqbn {

Structure apply_move(const Structure& g, const Move& m)
{
    Structure out = g;
    switch (m.kind) {
    case MoveKind::Add: out.add_edge(m.from, m.to); break;
    case MoveKind::Delete: out.remove_edge(m.from, m.to); break;
    case MoveKind::Reverse:
        out.remove_edge(m.from, m.to);
        out.add_edge(m.to, m.from);
        break;
    }
    return out;
}

std::vector<int> changed_children(const Move& m)
{
    if (m.kind == MoveKind::Reverse)
        return {m.to, m.from};
    return {m.to};
}

std::vector<std::pair<Move, Structure>> neighbors(const Structure& g)
{
    const int n = g.size();
    std::vector<std::pair<Move, Structure>> out;
    for (int from = 0; from < n; ++from)
        for (int to = 0; to < n; ++to)
            if (from != to && !g.has_edge(from, to) && !g.has_path(to, from)) {
                Move m{MoveKind::Add, from, to};
                out.emplace_back(m, apply_move(g, m));
            }
    for (int from = 0; from < n; ++from)
        for (int to = 0; to < n; ++to)
            if (from != to && g.has_edge(from, to)) {
                Move m{MoveKind::Delete, from, to};
                out.emplace_back(m, apply_move(g, m));
            }
    for (int from = 0; from < n; ++from)
        for (int to = 0; to < n; ++to)
            if (from != to && g.has_edge(from, to)) {
                Structure without = g;
                without.remove_edge(from, to);
                if (!without.has_path(from, to)) {
                    Move m{MoveKind::Reverse, from, to};
                    out.emplace_back(m, apply_move(g, m));
                }
            }
    return out;
}

LocalScorer store_scorer(const StatisticsStore& store, const ScoreConfig& cfg)
{
    return [&store, cfg](int child, std::span<const int> parents) { return local_score(store, child, parents, cfg); };
}

namespace {

class CachedScorer {
public:
    explicit CachedScorer(const LocalScorer& scorer) : scorer_(scorer) {}

    std::optional<double> operator()(int child, const std::vector<int>& parents)
    {
        auto key = std::make_pair(child, parents);
        if (auto it = cache_.find(key); it != cache_.end())
            return it->second;
        auto value = scorer_(child, parents);
        cache_.emplace(std::move(key), value);
        return value;
    }

private:
    const LocalScorer& scorer_;
    std::map<std::pair<int, std::vector<int>>, std::optional<double>> cache_;
};

bool within_cap(const Structure& g, const Move& m, int max_parents)
{
    for (int c : changed_children(m))
        if (static_cast<int>(g.parents(c).size()) > max_parents)
            return false;
    return true;
}

} // namespace

ClimbResult hill_climb(const Structure& g0, const LocalScorer& scorer, const ClimbOptions& opts)
{
    CachedScorer cached(scorer);
    ClimbResult result{g0, 0.0, {}, {}};
    std::vector<double> local(static_cast<std::size_t>(g0.size()));
    for (int i = 0; i < g0.size(); ++i) {
        const auto s = cached(i, g0.parents(i));
        if (!s)
            throw EvaluationError("initial structure cannot be scored: family of variable " + std::to_string(i));
        local[static_cast<std::size_t>(i)] = *s;
        result.score += *s;
    }
    result.score_trace.push_back(result.score);

    for (;;) {
        const double tolerance = opts.rel_tolerance * std::max(1.0, std::abs(result.score));
        std::optional<std::pair<Move, Structure>> best;
        double best_delta = 0.0;
        std::vector<std::pair<int, double>> best_locals;
        for (auto& [move, next] : neighbors(result.structure)) {
            if (!within_cap(next, move, opts.max_parents))
                continue;
            double delta = 0.0;
            std::vector<std::pair<int, double>> locals;
            bool evaluable = true;
            for (int c : changed_children(move)) {
                const auto s = cached(c, next.parents(c));
                if (!s) {
                    evaluable = false;
                    break;
                }
                delta += *s - local[static_cast<std::size_t>(c)];
                locals.emplace_back(c, *s);
            }
            // Candidates within the tolerance of the best so far count as ties and
            // lose to the earlier move, so score-equivalent orientations are not
            // decided by rounding.
            if (evaluable && delta > best_delta + tolerance) {
                best_delta = delta;
                best.emplace(move, std::move(next));
                best_locals = std::move(locals);
            }
        }
        if (!best)
            break;
        result.structure = std::move(best->second);
        result.moves.push_back(best->first);
        for (const auto& [c, s] : best_locals)
            local[static_cast<std::size_t>(c)] = s;
        // Re-sum rather than accumulate deltas so the reported total is exact.
        result.score = 0.0;
        for (double s : local)
            result.score += s;
        result.score_trace.push_back(result.score);
    }
    return result;
}

Structure hill_climb(const Structure& g0, const StatisticsStore& store, const ScoreConfig& cfg, int max_parents)
{
    return hill_climb(g0, store_scorer(store, cfg), ClimbOptions{max_parents}).structure;
}

bool Frontier::contains(const Structure& g) const
{
    return std::find(members.begin(), members.end(), g) != members.end();
}

std::set<FamilyKey> Frontier::keys() const
{
    std::set<FamilyKey> keys;
    for (const auto& g : members)
        keys.merge(suff(g));
    return keys;
}

Frontier compute_frontier(const Structure& g, int max_parents, int width, const LocalScorer& scorer)
{
    if (width < 1)
        throw ConfigError("frontier width must be at least 1");
    std::vector<Structure> candidates{g};
    if (width > 1) {
        if (!scorer)
            throw ConfigError("beam frontier needs a scorer");
        std::vector<std::pair<double, Structure>> ranked;
        for (auto& [move, next] : neighbors(g)) {
            if (!within_cap(next, move, max_parents))
                continue;
            double delta = 0.0;
            bool evaluable = true;
            for (int c : changed_children(move)) {
                const auto before = scorer(c, g.parents(c));
                const auto after = scorer(c, next.parents(c));
                if (!before || !after) {
                    evaluable = false;
                    break;
                }
                delta += *after - *before;
            }
            if (evaluable)
                ranked.emplace_back(delta, std::move(next));
        }
        std::stable_sort(ranked.begin(), ranked.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });
        for (std::size_t i = 0; i < ranked.size() && static_cast<int>(candidates.size()) < width; ++i)
            candidates.push_back(std::move(ranked[i].second));
    }
    std::set<Structure> seen;
    Frontier frontier;
    auto add = [&](Structure s) {
        if (seen.insert(s).second)
            frontier.members.push_back(std::move(s));
    };
    for (const auto& c : candidates)
        add(c);
    for (const auto& c : candidates)
        for (auto& [move, next] : neighbors(c))
            if (within_cap(next, move, max_parents))
                add(std::move(next));
    return frontier;
}

} // namespace seqbn
