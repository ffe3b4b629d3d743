#include "seqbn/experiment.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

#include <spdlog/spdlog.h>

#include "seqbn/dataset.hpp"
#include "seqbn/errors.hpp"
#include "seqbn/network_io.hpp"

namespace seqbn {

std::unique_ptr<SequentialLearner> make_learner(const BayesianNetwork& initial, const LearnerConfig& cfg,
                                                const EmConfig& em)
{
    switch (cfg.strategy) {
    case Strategy::Naive: return std::make_unique<NaiveLearner>(initial, cfg);
    case Strategy::Map: return std::make_unique<MapLearner>(initial, cfg);
    case Strategy::Incremental: return std::make_unique<IncrementalLearner>(initial, cfg);
    case Strategy::Em: {
        EmConfig full = em;
        full.learner = cfg;
        return std::make_unique<EmLearner>(initial, full);
    }
    }
    throw ConfigError("unknown strategy");
}

void validate(const ExperimentSpec& spec)
{
    if (spec.n_datasets < 1)
        throw ConfigError("need at least one dataset");
    if (!spec.seeds.empty() && static_cast<int>(spec.seeds.size()) != spec.n_datasets)
        throw ConfigError("number of seeds must equal the number of datasets");
    if (!(spec.missing >= 0.0 && spec.missing < 1.0))
        throw ConfigError("missingness rate must lie in [0, 1)");
    if (spec.strategies.empty() || spec.ks.empty())
        throw ConfigError("need at least one strategy and one k");
    for (int k : spec.ks)
        if (k < 1)
            throw ConfigError("k must be at least 1");
    if (spec.window < 1)
        throw ConfigError("window must be at least 1");
}

std::vector<std::uint64_t> dataset_seeds(const ExperimentSpec& spec)
{
    if (!spec.seeds.empty())
        return spec.seeds;
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < spec.n_datasets; ++i)
        seeds.push_back(spec.base_seed + static_cast<std::uint64_t>(i));
    return seeds;
}

namespace {

// Mask seeds are derived from the dataset seed so the two streams differ.
constexpr std::uint64_t kMaskSalt = 0x9E3779B97F4A7C15ull;

struct Task {
    std::size_t cell;
    int dataset;
};

std::string cell_name(Strategy s, ScoreKind score, int k)
{
    return std::string(to_string(s)) + "_" + std::string(to_string(score)) + "_k" + std::to_string(k);
}

} // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec)
{
    validate(spec);
    const BayesianNetwork truth = read_network(spec.network);
    const auto seeds = dataset_seeds(spec);
    namespace fs = std::filesystem;
    fs::create_directories(spec.out / "datasets");
    fs::create_directories(spec.out / "traces");
    fs::create_directories(spec.out / "windows");

    {
        std::ofstream manifest(spec.out / "seeds.tsv");
        manifest << "# format=1\ndataset\tseed\n";
        for (std::size_t i = 0; i < seeds.size(); ++i)
            manifest << i << '\t' << seeds[i] << '\n';
    }

    std::vector<std::vector<Instance>> complete;
    std::vector<std::vector<PartialInstance>> observed;
    for (int d = 0; d < spec.n_datasets; ++d) {
        const auto seed = seeds[static_cast<std::size_t>(d)];
        complete.push_back(sample_instances(truth, spec.n_instances, seed));
        observed.push_back(spec.missing > 0.0 ? hide_mcar(complete.back(), spec.missing, seed ^ kMaskSalt)
                                              : as_partial(complete.back()));
        write_dataset(spec.out / "datasets" / ("data_" + std::to_string(d) + ".csv"), truth.variables(),
                      observed.back());
    }

    ExperimentResult result;
    for (Strategy s : spec.strategies)
        for (int k : spec.ks) {
            std::vector<ScoreKind> scores = spec.scores;
            if (scores.empty())
                scores.push_back(default_score(s));
            for (ScoreKind score : scores)
                result.cells.push_back({s, k, score, 0.0, 0, 0, {}});
        }

    std::vector<Task> tasks;
    for (std::size_t c = 0; c < result.cells.size(); ++c)
        for (int d = 0; d < spec.n_datasets; ++d)
            tasks.push_back({c, d});

    const BayesianNetwork initial = BayesianNetwork::uniform(truth.variables(), Structure(truth.size()));
    std::vector<std::vector<std::vector<WindowMean>>> windows(
        result.cells.size(), std::vector<std::vector<WindowMean>>(static_cast<std::size_t>(spec.n_datasets)));
    std::vector<std::vector<std::size_t>> peaks(result.cells.size(),
                                                std::vector<std::size_t>(static_cast<std::size_t>(spec.n_datasets)));
    std::mutex error_mutex;
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t t; (t = next++) < tasks.size();) {
            const Task task = tasks[t];
            CellSummary& cell = result.cells[task.cell];
            const auto d = static_cast<std::size_t>(task.dataset);
            try {
                LearnerConfig cfg;
                cfg.strategy = cell.strategy;
                cfg.k = cell.k;
                cfg.score.kind = cell.score;
                cfg.score.ess = spec.ess;
                cfg.prior_ess = spec.ess;
                cfg.max_parents = spec.max_parents;
                EmConfig em;
                em.alpha = spec.alpha;
                em.n0 = spec.n0;
                auto learner = make_learner(initial, cfg, em);
                const auto trace = prequential_trace(*learner, complete[d], truth, observed[d]);
                std::ofstream out(spec.out / "traces" /
                                  (cell_name(cell.strategy, cell.score, cell.k) + "_d" + std::to_string(d) + ".csv"));
                write_trace_csv(out, trace);
                windows[task.cell][d] = windowed_average(trace, spec.window);
                std::size_t peak = 0;
                for (const auto& e : trace.entries)
                    peak = std::max(peak, e.memory);
                peaks[task.cell][d] = peak;
            } catch (const std::exception& e) {
                std::lock_guard lock(error_mutex);
                cell.errors.push_back("dataset " + std::to_string(d) + ": " + e.what());
                spdlog::error("{} dataset {}: {}", cell_name(cell.strategy, cell.score, cell.k), d, e.what());
            }
        }
    };
    const int n_threads = std::max(1, std::min<int>(spec.threads, static_cast<int>(tasks.size())));
    {
        std::vector<std::jthread> pool;
        for (int i = 1; i < n_threads; ++i)
            pool.emplace_back(worker);
        worker();
    }

    std::ofstream summary(spec.out / "summary.tsv");
    const auto old = summary.precision(std::numeric_limits<double>::max_digits10);
    summary << "# format=1\n"
            << "strategy\tk\tscore\tfinal_normloss\tfinal_normloss_bits\tpeak_memory\tdatasets_ok\n";
    for (std::size_t c = 0; c < result.cells.size(); ++c) {
        CellSummary& cell = result.cells[c];
        // Average aligned windows over the datasets that finished.
        std::vector<WindowMean> averaged;
        int ok = 0;
        for (std::size_t d = 0; d < windows[c].size(); ++d) {
            const auto& series = windows[c][d];
            if (series.empty())
                continue;
            ++ok;
            if (averaged.empty()) {
                averaged = series;
            } else {
                for (std::size_t w = 0; w < std::min(averaged.size(), series.size()); ++w)
                    averaged[w].mean += series[w].mean;
            }
            cell.peak_memory = std::max(cell.peak_memory, peaks[c][d]);
        }
        for (auto& w : averaged)
            w.mean /= std::max(ok, 1);
        cell.datasets_ok = ok;
        cell.final_normloss = averaged.empty() ? std::numeric_limits<double>::quiet_NaN() : averaged.back().mean;
        if (!cell.errors.empty())
            result.ok = false;
        std::ofstream wout(spec.out / "windows" / (cell_name(cell.strategy, cell.score, cell.k) + ".csv"));
        write_window_csv(wout, averaged);
        summary << to_string(cell.strategy) << '\t' << cell.k << '\t' << to_string(cell.score) << '\t'
                << cell.final_normloss << '\t' << cell.final_normloss / std::numbers::ln2 << '\t' << cell.peak_memory
                << '\t' << ok << '\n';
    }
    summary.precision(old);
    return result;
}

namespace {

double log_marginal(const BayesianNetwork& net, const PartialInstance& y)
{
    bool complete = true;
    for (const auto& v : y)
        complete = complete && v.has_value();
    if (complete) {
        Instance u;
        for (const auto& v : y)
            u.push_back(*v);
        return net.joint_log_prob(u);
    }
    return std::log(net.for_each_completion(y, [](const Instance&, double) {}));
}

} // namespace

LearnOutcome learn_stream(const VariableTable& vars, std::span<const PartialInstance> data, const LearnerConfig& cfg,
                          const EmConfig& em, const std::optional<BayesianNetwork>& initial,
                          const std::optional<BayesianNetwork>& truth)
{
    if (initial && initial->variables() != vars)
        throw SchemaError("dataset variables do not match the initial network");
    if (truth && truth->variables() != vars)
        throw SchemaError("dataset variables do not match the reference network");
    const BayesianNetwork start = initial ? *initial : BayesianNetwork::uniform(vars, Structure(vars.size()));
    auto learner = make_learner(start, cfg, em);
    LossTrace trace;
    for (std::size_t i = 0; i < data.size(); ++i) {
        TraceEntry entry;
        entry.n = static_cast<std::int64_t>(i) + 1;
        const double lp = log_marginal(learner->current(), data[i]);
        entry.logloss = -lp;
        entry.normloss = truth ? log_marginal(*truth, data[i]) - lp : std::numeric_limits<double>::quiet_NaN();
        learner->step(data[i]);
        entry.memory = learner->memory_units();
        trace.entries.push_back(entry);
    }
    return {learner->current(), std::move(trace)};
}

} // namespace seqbn
