#include "seqbn/eval.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>

#include "seqbn/errors.hpp"

namespace seqbn {

double normalized_loss_term(const BayesianNetwork& pstar, const BayesianNetwork& model, const Instance& u)
{
    if (pstar.variables() != model.variables())
        throw StructuralError("normalized loss needs networks over the same variables");
    return pstar.joint_log_prob(u) - model.joint_log_prob(u);
}

double kl_divergence(const BayesianNetwork& p, const BayesianNetwork& q)
{
    if (p.variables() != q.variables())
        throw StructuralError("KL divergence needs networks over the same variables");
    double kl = 0.0;
    const PartialInstance none(static_cast<std::size_t>(p.size()));
    p.for_each_completion(none, [&](const Instance& u, double pu) {
        if (pu <= 0.0)
            return;
        const double qu = q.joint_prob(u);
        kl += qu > 0.0 ? pu * std::log(pu / qu) : std::numeric_limits<double>::infinity();
    });
    return kl;
}

BayesianNetwork project(const BayesianNetwork& pstar, const Structure& g)
{
    const auto& vars = pstar.variables();
    std::vector<Cpt> cpts;
    for (int i = 0; i < g.size(); ++i) {
        Cpt c;
        c.child = i;
        c.parents = g.parents(i);
        c.child_cardinality = vars.cardinality(i);
        // Joint over family in the CPT layout: parents (lowest id fastest) then child.
        std::vector<int> family = c.parents;
        const std::size_t rows = joint_state_count(vars, family);
        const auto r = static_cast<std::size_t>(c.child_cardinality);
        c.table.assign(rows * r, 0.0);
        const PartialInstance none(static_cast<std::size_t>(vars.size()));
        pstar.for_each_completion(none, [&](const Instance& u, double p) {
            c.table[projected_index(vars, family, u) * r + static_cast<std::size_t>(u[static_cast<std::size_t>(i)])] += p;
        });
        for (std::size_t row = 0; row < rows; ++row) {
            const double total = std::accumulate(c.table.begin() + static_cast<std::ptrdiff_t>(row * r),
                                                 c.table.begin() + static_cast<std::ptrdiff_t>((row + 1) * r), 0.0);
            for (std::size_t x = 0; x < r; ++x)
                c.table[row * r + x] = total > 0.0 ? c.table[row * r + x] / total : 1.0 / static_cast<double>(r);
        }
        cpts.push_back(std::move(c));
    }
    return BayesianNetwork(vars, g, std::move(cpts));
}

double inherent_error(const BayesianNetwork& pstar, const Structure& g)
{
    return kl_divergence(pstar, project(pstar, g));
}

std::vector<WindowMean> windowed_average(const LossTrace& trace, int window)
{
    if (window < 1)
        throw ConfigError("window must be at least 1");
    std::vector<WindowMean> out;
    const auto& e = trace.entries;
    const auto w = static_cast<std::size_t>(window);
    for (std::size_t start = 0; start < e.size(); start += w) {
        const std::size_t end = std::min(e.size(), start + w);
        double sum = 0.0;
        for (std::size_t i = start; i < end; ++i)
            sum += e[i].normloss;
        out.push_back({e[start].n, sum / static_cast<double>(end - start), end - start, end - start < w});
    }
    return out;
}

LossTrace prequential_trace(SequentialLearner& learner, std::span<const Instance> stream,
                            const BayesianNetwork& pstar, std::span<const PartialInstance> observed)
{
    if (!observed.empty() && observed.size() != stream.size())
        throw ConfigError("observed stream length differs from the complete stream");
    LossTrace trace;
    trace.entries.reserve(stream.size());
    for (std::size_t i = 0; i < stream.size(); ++i) {
        const auto& u = stream[i];
        const std::int64_t n = static_cast<std::int64_t>(i) + 1;
        // The model used here must have been emitted after exactly n-1 instances.
        if (learner.instances_seen() != n - 1)
            throw std::logic_error("prequential order violated");
        const BayesianNetwork& model = learner.current();
        TraceEntry entry;
        entry.n = n;
        entry.logloss = -model.joint_log_prob(u);
        entry.normloss = pstar.joint_log_prob(u) + entry.logloss;
        if (observed.empty())
            learner.step(u);
        else
            learner.step(observed[i]);
        entry.memory = learner.memory_units();
        trace.entries.push_back(entry);
    }
    return trace;
}

void write_trace_csv(std::ostream& out, const LossTrace& trace)
{
    const auto old = out.precision(std::numeric_limits<double>::max_digits10);
    out << "# format=1\n"
        << "n,logloss,normloss,memory\n";
    for (const auto& e : trace.entries)
        out << e.n << ',' << e.logloss << ',' << e.normloss << ',' << e.memory << '\n';
    out.precision(old);
}

void write_window_csv(std::ostream& out, std::span<const WindowMean> windows)
{
    const auto old = out.precision(std::numeric_limits<double>::max_digits10);
    out << "# format=1\n"
        << "window_start,mean_normloss\n";
    for (const auto& w : windows)
        out << w.start << ',' << w.mean << '\n';
    out.precision(old);
}

} // namespace seqbn
