#pragma once

// Greedy hill climbing over DAGs with arc addition, deletion and reversal.
// The climber only moves to neighbors whose changed families can be scored,
// so over a statistics store it searches Nets(S) one move at a time.

#include <compare>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "seqbn/bn.hpp"
#include "seqbn/scoring.hpp"
#include "seqbn/statstore.hpp"

namespace seqbn {

inline constexpr int kDefaultMaxParents = 5;

enum class MoveKind { Add = 0, Delete = 1, Reverse = 2 };

struct Move {
    MoveKind kind = MoveKind::Add;
    int from = 0;
    int to = 0;

    auto operator<=>(const Move&) const = default;
};

/// Applies `m` to `g` without checking acyclicity.
Structure apply_move(const Structure& g, const Move& m);

/// Variables whose parent sets change under `m`.
std::vector<int> changed_children(const Move& m);

/// All acyclic single-move neighbors, ordered by (kind, from, to).
std::vector<std::pair<Move, Structure>> neighbors(const Structure& g);

/// Local score of (child, parents), or nullopt when it cannot be evaluated.
using LocalScorer = std::function<std::optional<double>(int child, std::span<const int> parents)>;

LocalScorer store_scorer(const StatisticsStore& store, const ScoreConfig& cfg);

struct ClimbOptions {
    int max_parents = kDefaultMaxParents;
    /// A move is taken only if it improves the total by more than
    /// rel_tolerance * max(1, |total|).
    double rel_tolerance = 1e-9;
};

struct ClimbResult {
    Structure structure;
    double score = 0.0;
    std::vector<Move> moves;
    /// Total score before the first move and after each move.
    std::vector<double> score_trace;
};

/// Moves to the best strictly-better evaluable neighbor until none exists.
/// Ties go to the first neighbor in move order. Throws EvaluationError if g0
/// itself cannot be scored.
ClimbResult hill_climb(const Structure& g0, const LocalScorer& scorer, const ClimbOptions& opts = {});

Structure hill_climb(const Structure& g0, const StatisticsStore& store, const ScoreConfig& cfg,
                     int max_parents = kDefaultMaxParents);

struct Frontier {
    std::vector<Structure> members;

    bool contains(const Structure& g) const;
    /// suff(G) for every member, merged.
    std::set<FamilyKey> keys() const;
};

/// width = 1: g and all its neighbors. width = j > 1: g plus its j-1 best
/// evaluable neighbors under `scorer`, and all their neighbors. Neighbors
/// that exceed max_parents are left out.
Frontier compute_frontier(const Structure& g, int max_parents = kDefaultMaxParents, int width = 1,
                          const LocalScorer& scorer = {});

} // namespace seqbn
