#include "seqbn/dataset.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "seqbn/errors.hpp"

namespace seqbn {
namespace {

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ','))
        fields.push_back(field);
    if (!line.empty() && line.back() == ',')
        fields.emplace_back();
    return fields;
}

std::string trim(std::string s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string at_line(int line, const std::string& what)
{
    return "line " + std::to_string(line) + ": " + what;
}

} // namespace

bool Dataset::complete() const
{
    for (const auto& row : rows)
        for (const auto& v : row)
            if (!v)
                return false;
    return true;
}

std::vector<Instance> Dataset::complete_rows() const
{
    std::vector<Instance> out;
    out.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        Instance inst;
        for (const auto& v : rows[r]) {
            if (!v)
                throw SchemaError("row " + std::to_string(r + 1) + " has missing values");
            inst.push_back(*v);
        }
        out.push_back(std::move(inst));
    }
    return out;
}

Dataset parse_dataset(std::istream& in)
{
    Dataset ds;
    std::string raw;
    int number = 0;
    bool have_header = false;
    while (std::getline(in, raw)) {
        ++number;
        const std::string line = trim(raw);
        if (line.empty() || line.front() == '#')
            continue;
        const auto fields = split_csv(line);
        if (!have_header) {
            std::vector<Variable> vars;
            for (const auto& f : fields) {
                const std::string field = trim(f);
                const auto colon = field.rfind(':');
                if (colon == std::string::npos || colon == 0)
                    throw SchemaError(at_line(number, "header field '" + field + "' is not name:cardinality"));
                int card = 0;
                const std::string digits = field.substr(colon + 1);
                auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), card);
                if (ec != std::errc{} || ptr != digits.data() + digits.size())
                    throw SchemaError(at_line(number, "bad cardinality in '" + field + "'"));
                vars.push_back({field.substr(0, colon), card});
            }
            try {
                ds.vars = VariableTable(std::move(vars));
            } catch (const StructuralError& e) {
                throw SchemaError(at_line(number, e.what()));
            }
            have_header = true;
            continue;
        }
        if (static_cast<int>(fields.size()) != ds.vars.size())
            throw SchemaError(at_line(number, "expected " + std::to_string(ds.vars.size()) + " fields, got " +
                                                  std::to_string(fields.size())));
        PartialInstance row;
        row.reserve(fields.size());
        for (std::size_t i = 0; i < fields.size(); ++i) {
            const std::string field = trim(fields[i]);
            if (field == "?") {
                row.emplace_back(std::nullopt);
                continue;
            }
            int value = 0;
            auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
            if (ec != std::errc{} || ptr != field.data() + field.size())
                throw SchemaError(at_line(number, "bad value '" + field + "'"));
            if (value < 0 || value >= ds.vars.cardinality(static_cast<int>(i)))
                throw SchemaError(at_line(number, "value " + field + " out of range for '" +
                                                      ds.vars[static_cast<int>(i)].name + "'"));
            row.emplace_back(value);
        }
        ds.rows.push_back(std::move(row));
    }
    if (!have_header)
        throw SchemaError("dataset has no header line");
    return ds;
}

Dataset read_dataset(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open dataset " + path.string());
    return parse_dataset(in);
}

void write_dataset(std::ostream& out, const VariableTable& vars, std::span<const PartialInstance> rows)
{
    out << "# format=1\n";
    for (int i = 0; i < vars.size(); ++i)
        out << (i ? "," : "") << vars[i].name << ':' << vars[i].cardinality;
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i)
                out << ',';
            if (row[i])
                out << *row[i];
            else
                out << '?';
        }
        out << '\n';
    }
}

void write_dataset(const std::filesystem::path& path, const VariableTable& vars, std::span<const PartialInstance> rows)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write dataset " + path.string());
    write_dataset(out, vars, rows);
}

std::vector<Instance> sample_instances(const BayesianNetwork& net, std::size_t count, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<Instance> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(net.sample(rng));
    return out;
}

std::vector<PartialInstance> hide_mcar(std::span<const Instance> data, double rate, std::uint64_t seed)
{
    if (!(rate >= 0.0 && rate < 1.0))
        throw ConfigError("missingness rate must lie in [0, 1)");
    Rng rng(seed);
    std::bernoulli_distribution hide(rate);
    std::vector<PartialInstance> out;
    out.reserve(data.size());
    for (const auto& inst : data) {
        PartialInstance row;
        row.reserve(inst.size());
        for (int v : inst)
            row.push_back(hide(rng) ? std::nullopt : std::optional<int>(v));
        out.push_back(std::move(row));
    }
    return out;
}

std::vector<PartialInstance> as_partial(std::span<const Instance> data)
{
    std::vector<PartialInstance> out;
    out.reserve(data.size());
    for (const auto& inst : data)
        out.emplace_back(inst.begin(), inst.end());
    return out;
}

} // namespace seqbn
