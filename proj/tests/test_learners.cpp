#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "seqbn/dataset.hpp"
#include "seqbn/errors.hpp"
#include "seqbn/experiment.hpp"
#include "seqbn/learners.hpp"

using namespace seqbn;

namespace {

LearnerConfig config(Strategy s, int k)
{
    LearnerConfig c;
    c.strategy = s;
    c.k = k;
    c.score.kind = default_score(s);
    return c;
}

BayesianNetwork empty_start(const BayesianNetwork& net)
{
    return BayesianNetwork::uniform(net.variables(), Structure(net.size()));
}

void check_normalized(const BayesianNetwork& b)
{
    for (int i = 0; i < b.size(); ++i) {
        const auto& cpt = b.cpt(i);
        for (std::size_t r = 0; r < cpt.rows(); ++r) {
            double total = 0;
            for (double p : cpt.row(r)) {
                CHECK(p > 0.0);
                total += p;
            }
            CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

bool same_parameters(const BayesianNetwork& a, const BayesianNetwork& b, double tol)
{
    if (a.structure() != b.structure())
        return false;
    for (int i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a.cpt(i).table.size(); ++j)
            if (std::abs(a.cpt(i).table[j] - b.cpt(i).table[j]) > tol)
                return false;
    return true;
}

} // namespace

TEST_CASE("strategy names and config validation")
{
    for (auto s : {Strategy::Naive, Strategy::Map, Strategy::Incremental, Strategy::Em})
        CHECK(parse_strategy(to_string(s)) == s);
    CHECK_THROWS_AS(parse_strategy("greedy"), ConfigError);
    auto c = config(Strategy::Naive, 0);
    CHECK_THROWS_AS(validate(c), ConfigError);
    const auto net = oracle::load("chain3.net");
    CHECK_THROWS_AS(NaiveLearner(net, c), ConfigError);
}

TEST_CASE("one instance cannot add an arc between independent variables")
{
    const VariableTable vars({{"A", 2}, {"B", 2}});
    const auto start = BayesianNetwork::uniform(vars, Structure(2));
    IncrementalLearner learner(start, config(Strategy::Incremental, 1));
    learner.step(Instance{1, 0});
    CHECK(learner.current().structure() == Structure(2));
    REQUIRE(learner.history().size() == 1);
    CHECK(learner.history()[0].n == 1);
}

TEST_CASE("structure only changes at decision points; parameters every step")
{
    const auto net = oracle::load("chain3.net");
    const auto data = sample_instances(net, 600, 13);
    for (auto s : {Strategy::Naive, Strategy::Map, Strategy::Incremental}) {
        CAPTURE(to_string(s));
        auto learner = make_learner(empty_start(net), config(s, 100));
        Structure previous = learner->current().structure();
        BayesianNetwork previous_model = learner->current();
        for (std::size_t i = 0; i < data.size(); ++i) {
            const auto& b = learner->step(data[i]);
            const auto n = static_cast<std::int64_t>(i) + 1;
            CHECK(learner->instances_seen() == n);
            if (n % 100 != 0)
                CHECK(b.structure() == previous);
            else
                CHECK(learner->history().back().n == n);
            if (b.structure() == previous_model.structure() && n % 100 != 0)
                CHECK_FALSE(same_parameters(b, previous_model, 0.0));
            check_normalized(b);
            previous = b.structure();
            previous_model = b;
        }
        CHECK(learner->history().size() == 6);
        CHECK(learner->current().structure().edge_count() >= 1);
    }
}

TEST_CASE("learners reject malformed instances")
{
    const auto net = oracle::load("chain3.net");
    for (auto s : {Strategy::Naive, Strategy::Map, Strategy::Incremental}) {
        auto learner = make_learner(empty_start(net), config(s, 10));
        CHECK_THROWS_AS(learner->step(Instance{0, 1}), SchemaError);
        CHECK_THROWS_AS(learner->step(Instance{0, 1, 2}), SchemaError);
        CHECK_THROWS_AS(learner->step(PartialInstance{0, std::nullopt, 1}), SchemaError);
        CHECK_NOTHROW(learner->step(PartialInstance{0, 1, 1}));
    }
}

TEST_CASE("learners are deterministic")
{
    const auto net = oracle::load("mix5.net");
    const auto data = sample_instances(net, 500, 21);
    for (auto s : {Strategy::Naive, Strategy::Map, Strategy::Incremental}) {
        auto a = make_learner(empty_start(net), config(s, 50));
        auto b = make_learner(empty_start(net), config(s, 50));
        for (const auto& u : data) {
            a->step(u);
            b->step(u);
        }
        CHECK(to_string(a->current()) == to_string(b->current()));
    }
}

TEST_CASE("state payload invariants")
{
    const auto net = oracle::load("mix5.net");
    const auto data = sample_instances(net, 730, 3);
    NaiveLearner naive(empty_start(net), config(Strategy::Naive, 100));
    MapLearner map(empty_start(net), config(Strategy::Map, 100));
    IncrementalLearner inc(empty_start(net), config(Strategy::Incremental, 100));
    for (std::size_t i = 0; i < data.size(); ++i) {
        naive.step(data[i]);
        map.step(data[i]);
        inc.step(data[i]);
        const auto n = i + 1;
        CHECK(naive.buffer().size() == n);
        CHECK(map.buffered() == n % 100);
        CHECK(inc.frontier().contains(inc.current().structure()));
        CHECK(can_evaluate(inc.current().structure(), inc.store()));
    }
}

TEST_CASE("emitted parameters come from the available statistics")
{
    const auto net = oracle::load("net4.net");
    const auto data = sample_instances(net, 450, 5);
    NaiveLearner naive(empty_start(net), config(Strategy::Naive, 100));
    IncrementalLearner inc(empty_start(net), config(Strategy::Incremental, 100));
    for (std::size_t i = 0; i < data.size(); ++i) {
        naive.step(data[i]);
        inc.step(data[i]);
        if ((i + 1) % 50 != 0)
            continue;
        const std::span<const Instance> seen(data.data(), i + 1);
        StatisticsStore batch(net.variables());
        for (const auto& key : suff(naive.current().structure()))
            batch.insert(count_records(net.variables(), key, seen));
        CHECK(same_parameters(naive.current(), mle_parameters(naive.current().structure(), batch, 5.0), 1e-12));
        CHECK(same_parameters(inc.current(), mle_parameters(inc.current().structure(), inc.store(), 5.0), 0.0));
    }
}

TEST_CASE("naive update")
{
    const auto net = oracle::load("chain3.net");
    ScoreConfig bde;
    bde.kind = ScoreKind::Bde;
    const auto start = Structure::from_parents({{}, {}, {0}});
    CHECK(naive_update(start, net.variables(), {}, bde) == start);

    // Identical instances carry no dependence signal. Under MDL only the
    // penalty differs; uniform-prior BDe rewards arcs on deterministic data.
    ScoreConfig mdl;
    mdl.kind = ScoreKind::Mdl;
    const std::vector<Instance> same(200, Instance{1, 0, 1});
    const auto g = naive_update(Structure(3), net.variables(), same, mdl);
    CHECK(g == Structure(3));
    double best = -INFINITY;
    Structure arg;
    for (const auto& h : oracle::all_dags(3)) {
        const double s = oracle::batch_mdl(net.variables(), h, same);
        if (s > best + 1e-9) {
            best = s;
            arg = h;
        }
    }
    CHECK(arg == Structure(3));
}

TEST_CASE("naive agrees across k at common checkpoints")
{
    const auto net = oracle::load("net4.net");
    const auto data = sample_instances(net, 800, 17);
    NaiveLearner k100(empty_start(net), config(Strategy::Naive, 100));
    NaiveLearner k400(empty_start(net), config(Strategy::Naive, 400));
    for (const auto& u : data) {
        k100.step(u);
        k400.step(u);
    }
    CHECK(oracle::markov_equivalent(k100.current().structure(), k400.current().structure()));
}

TEST_CASE("map update")
{
    const auto net = oracle::load("net4.net");
    const auto start = empty_start(net);
    const auto data = sample_instances(net, 300, 23);
    auto cfg = config(Strategy::Map, 300);

    SUBCASE("zero prior weight is batch learning on the buffer")
    {
        const auto update = map_update(start.structure(), PriorNetwork(start, 0.0), data, cfg);
        CHECK(update.structure == naive_update(start.structure(), net.variables(), data, cfg.score));
        CHECK(update.prior->weight() == 300);
    }
    SUBCASE("a strong generating prior keeps its structure")
    {
        const auto update = map_update(net.structure(), PriorNetwork(net, 1e6), data, cfg);
        CHECK(update.structure == net.structure());
    }
    SUBCASE("weight cap")
    {
        cfg.map_weight_cap = 250.0;
        const auto update = map_update(start.structure(), PriorNetwork(start, 100.0), data, cfg);
        CHECK(update.prior->weight() == 250);
    }
}

TEST_CASE("map learner carries the model forward as its prior")
{
    const auto net = oracle::load("chain3.net");
    const auto data = sample_instances(net, 300, 4);
    MapLearner learner(empty_start(net), config(Strategy::Map, 100));
    for (const auto& u : data)
        learner.step(u);
    CHECK(learner.prior().weight() == 300);
    CHECK(learner.buffered() == 0);
    // Right after a decision the model is estimated from the prior's pseudo-counts
    // alone, which is close to the posterior-mean network.
    CHECK(same_parameters(learner.current(), learner.prior().network(), 0.02));
    CHECK(learner.memory_units() == learner.current().parameter_count());
}

TEST_CASE("incremental update keeps history for surviving families")
{
    const auto net = oracle::load("chain3.net");
    const auto data = sample_instances(net, 400, 8);
    IncrementalLearner learner(empty_start(net), config(Strategy::Incremental, 200));
    for (std::size_t i = 0; i < 200; ++i)
        learner.step(data[i]);
    const auto g = learner.current().structure();
    REQUIRE(g.edge_count() >= 1);
    const auto& store = learner.store();
    // Keys of the new frontier that did not exist before were born at n = 200.
    const auto before = compute_frontier(Structure(3)).keys();
    for (const auto& [key, rec] : store.records()) {
        if (before.count(key)) {
            CHECK(rec.birth_index == 0);
            CHECK(rec.absorbed == 200);
        } else {
            bool has_superset = false;
            for (const auto& old : before)
                has_superset = has_superset || key.is_subset_of(old);
            if (!has_superset) {
                CHECK(rec.birth_index == 200);
                CHECK(rec.absorbed == 0);
            }
        }
    }
    // Without any change the retarget is the identity.
    std::ostringstream a, b;
    StatisticsStore copy = store;
    Frontier f = learner.frontier();
    auto cfg = learner.config();
    copy.dump(a);
    const auto same = incremental_update(g, copy, f, cfg);
    copy.dump(b);
    CHECK(same == g);
    CHECK(a.str() == b.str());
}

TEST_CASE("incremental memory stops changing once the structure settles")
{
    const auto net = oracle::load("net6.net");
    const auto data = sample_instances(net, 8000, 1);
    IncrementalLearner learner(empty_start(net), config(Strategy::Incremental, 100));
    std::vector<std::size_t> memory;
    for (const auto& u : data) {
        learner.step(u);
        memory.push_back(learner.memory_units());
    }
    const auto tail_min = *std::min_element(memory.end() - 3000, memory.end());
    const auto tail_max = *std::max_element(memory.end() - 3000, memory.end());
    CHECK(tail_min == tail_max);
    std::size_t bound = 0;
    for (const auto& key : learner.frontier().keys())
        bound += joint_state_count(net.variables(), key.vars());
    CHECK(learner.memory_units() == bound);
}

TEST_CASE("incremental structure recovery on six variables")
{
    const auto net = oracle::load("net6.net");
    double distance = 0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const auto data = sample_instances(net, 10'000, seed);
        IncrementalLearner learner(empty_start(net), config(Strategy::Incremental, 100));
        for (const auto& u : data)
            learner.step(u);
        distance += oracle::skeleton_distance(learner.current().structure(), net.structure());
    }
    CHECK(distance / 3 <= 2.0);
}
