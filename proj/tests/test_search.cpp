#include <doctest.h>

#include <algorithm>
#include <limits>

#include "oracles.hpp"
#include "seqbn/dataset.hpp"
#include "seqbn/search.hpp"

using namespace seqbn;

namespace {

/// Every single-edge edit of g that stays acyclic, found by brute force.
std::set<Structure> brute_neighbors(const Structure& g)
{
    std::set<Structure> out;
    const int n = g.size();
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            if (a == b)
                continue;
            std::vector<std::vector<int>> parents;
            for (int i = 0; i < n; ++i)
                parents.push_back(g.parents(i));
            auto& pb = parents[static_cast<std::size_t>(b)];
            auto& pa = parents[static_cast<std::size_t>(a)];
            const bool has = std::find(pb.begin(), pb.end(), a) != pb.end();
            const bool back = std::find(pa.begin(), pa.end(), b) != pa.end();
            if (!has && !back) {
                auto add = parents;
                add[static_cast<std::size_t>(b)].push_back(a);
                if (oracle::acyclic(add))
                    out.insert(Structure::from_parents(add));
            }
            if (has) {
                auto del = parents;
                auto& d = del[static_cast<std::size_t>(b)];
                d.erase(std::find(d.begin(), d.end(), a));
                out.insert(Structure::from_parents(del));
                auto rev = del;
                rev[static_cast<std::size_t>(a)].push_back(b);
                if (oracle::acyclic(rev))
                    out.insert(Structure::from_parents(rev));
            }
        }
    return out;
}

StatisticsStore full_store(const VariableTable& vars, std::span<const Instance> data)
{
    StatisticsStore s(vars);
    std::vector<int> all;
    for (int i = 0; i < vars.size(); ++i)
        all.push_back(i);
    s.add_key(FamilyKey(all));
    for (const auto& u : data)
        s.absorb(u);
    return s;
}

ScoreConfig cfg(ScoreKind kind)
{
    ScoreConfig c;
    c.kind = kind;
    return c;
}

} // namespace

TEST_CASE("neighbors of two unconnected variables")
{
    const auto ns = neighbors(Structure(2));
    REQUIRE(ns.size() == 2);
    CHECK(ns[0].first == Move{MoveKind::Add, 0, 1});
    CHECK(ns[1].first == Move{MoveKind::Add, 1, 0});
}

TEST_CASE("neighbors of the chain A->B->C")
{
    const auto chain = Structure::from_parents({{}, {0}, {1}});
    const auto ns = neighbors(chain);
    std::vector<Move> moves;
    for (const auto& [m, g] : ns)
        moves.push_back(m);
    const std::vector<Move> expect{{MoveKind::Add, 0, 2},     {MoveKind::Delete, 0, 1}, {MoveKind::Delete, 1, 2},
                                   {MoveKind::Reverse, 0, 1}, {MoveKind::Reverse, 1, 2}};
    CHECK(moves == expect);
}

TEST_CASE("neighbors agree with a brute-force acyclicity filter")
{
    for (int n : {3, 4})
        for (const auto& g : oracle::all_dags(n)) {
            std::set<Structure> got;
            Move previous{MoveKind::Add, -1, -1};
            for (const auto& [m, h] : neighbors(g)) {
                CHECK(h.is_acyclic());
                CHECK(previous < m);
                previous = m;
                got.insert(h);
            }
            CHECK(got == brute_neighbors(g));
        }
}

TEST_CASE("complete DAG on three nodes")
{
    const auto full = Structure::from_parents({{}, {0}, {0, 1}});
    int adds = 0, deletes = 0, reverses = 0;
    for (const auto& [m, g] : neighbors(full)) {
        adds += m.kind == MoveKind::Add;
        deletes += m.kind == MoveKind::Delete;
        reverses += m.kind == MoveKind::Reverse;
    }
    CHECK(adds == 0);
    CHECK(deletes == 3);
    // A->C cannot turn around because of A->B->C; the other two can.
    CHECK(reverses == 2);
}

TEST_CASE("hill climbing on a store restricted to suff(G0)")
{
    const auto net = oracle::load("chain3.net");
    const auto data = sample_instances(net, 500, 2);
    StatisticsStore s(net.variables());
    for (const auto& k : suff(Structure(3)))
        s.add_key(k);
    for (const auto& u : data)
        s.absorb(u);
    // Only singletons: nothing but the empty structure can be scored.
    CHECK(hill_climb(Structure(3), s, cfg(ScoreKind::Bde)) == Structure(3));
}

TEST_CASE("hill climbing recovers the chain's equivalence class")
{
    const auto net = oracle::load("chain3.net");
    const auto data = sample_instances(net, 5000, 4);
    const auto store = full_store(net.variables(), data);
    const auto c = cfg(ScoreKind::Bde);
    const auto result = hill_climb(Structure(3), store, c);
    CHECK(oracle::markov_equivalent(result, net.structure()));
    // Exhaustive oracle: the best of all 25 DAGs is in the same class.
    double best = -std::numeric_limits<double>::infinity();
    Structure arg;
    for (const auto& g : oracle::all_dags(3)) {
        const double s = oracle::batch_bde(net.variables(), g, data, 5.0);
        if (s > best) {
            best = s;
            arg = g;
        }
    }
    CHECK(oracle::markov_equivalent(arg, net.structure()));
    CHECK(total_score(result, store, c) == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("independent data leads to the empty structure")
{
    const VariableTable vars({{"A", 2}, {"B", 2}, {"C", 2}});
    const auto net = BayesianNetwork::uniform(vars, Structure(3));
    const auto data = sample_instances(net, 2000, 6);
    const auto store = full_store(vars, data);
    double best = -std::numeric_limits<double>::infinity();
    Structure arg;
    for (const auto& g : oracle::all_dags(3)) {
        const double s = oracle::batch_mdl(vars, g, data);
        if (s > best) {
            best = s;
            arg = g;
        }
    }
    CHECK(arg == Structure(3));
    for (const auto& g0 : oracle::all_dags(3))
        CHECK(hill_climb(g0, store, cfg(ScoreKind::Mdl)) == Structure(3));
}

TEST_CASE("hill climbing is monotone, evaluable, deterministic and fixes optima")
{
    const auto net = oracle::load("net4.net");
    const auto data = sample_instances(net, 800, 9);
    const auto store = full_store(net.variables(), data);
    for (auto kind : {ScoreKind::Mdl, ScoreKind::Bde}) {
        const auto c = cfg(kind);
        const auto scorer = store_scorer(store, c);
        const auto r = hill_climb(Structure(4), scorer);
        REQUIRE(r.score_trace.size() == r.moves.size() + 1);
        for (std::size_t i = 1; i < r.score_trace.size(); ++i)
            CHECK(r.score_trace[i] > r.score_trace[i - 1]);
        CHECK(r.structure.is_acyclic());
        CHECK(can_evaluate(r.structure, store));
        CHECK(hill_climb(Structure(4), scorer).structure == r.structure);

        double best = -std::numeric_limits<double>::infinity();
        Structure arg;
        for (const auto& g : oracle::all_dags(4)) {
            const double s = total_score(g, store, c);
            if (s > best) {
                best = s;
                arg = g;
            }
        }
        const auto from_opt = hill_climb(arg, scorer);
        CHECK(from_opt.structure == arg);
        CHECK(from_opt.moves.empty());
    }
}

TEST_CASE("max_parents caps family size")
{
    const auto net = oracle::load("net4.net");
    const auto data = sample_instances(net, 3000, 10);
    const auto store = full_store(net.variables(), data);
    ClimbOptions opts;
    opts.max_parents = 1;
    const auto r = hill_climb(Structure(4), store_scorer(store, cfg(ScoreKind::Bde)), opts);
    for (int i = 0; i < 4; ++i)
        CHECK(r.structure.parents(i).size() <= 1);
}

TEST_CASE("unscorable start throws")
{
    const VariableTable vars({{"A", 2}, {"B", 2}});
    StatisticsStore s(vars);
    s.add_key(FamilyKey({0}));
    s.add_key(FamilyKey({1}));
    CHECK_THROWS(hill_climb(Structure::from_parents({{}, {0}}), s, cfg(ScoreKind::Bde)));
}

TEST_CASE("frontier")
{
    SUBCASE("two unconnected variables")
    {
        const auto f = compute_frontier(Structure(2));
        CHECK(f.members.size() == 3);
        CHECK(f.contains(Structure(2)));
    }
    SUBCASE("keys are suff(G) plus one new family per add or reverse neighbor")
    {
        for (const auto& g : oracle::all_dags(4)) {
            const auto f = compute_frontier(g);
            std::set<FamilyKey> expect = suff(g);
            for (const auto& [m, h] : neighbors(g))
                for (int child : changed_children(m))
                    expect.insert(FamilyKey::family(child, h.parents(child)));
            CHECK(f.keys() == expect);
            std::set<FamilyKey> union_keys;
            for (const auto& h : f.members)
                for (const auto& k : suff(h))
                    union_keys.insert(k);
            CHECK(f.keys() == union_keys);
        }
    }
    SUBCASE("chain A->B->C by hand")
    {
        using K = FamilyKey;
        const auto f = compute_frontier(Structure::from_parents({{}, {0}, {1}}));
        CHECK(f.keys() == std::set<K>{K({0}), K({1}), K({2}), K({0, 1}), K({1, 2}), K({0, 1, 2})});
    }
    SUBCASE("wider beams contain the width-1 frontier")
    {
        const auto net = oracle::load("net4.net");
        const auto data = sample_instances(net, 400, 3);
        const auto store = full_store(net.variables(), data);
        const auto g = Structure::from_parents({{}, {0}, {}, {}});
        const auto narrow = compute_frontier(g);
        const auto wide = compute_frontier(g, kDefaultMaxParents, 3, store_scorer(store, cfg(ScoreKind::Bde)));
        CHECK(wide.members.size() > narrow.members.size());
        for (const auto& h : narrow.members)
            CHECK(wide.contains(h));
    }
}
