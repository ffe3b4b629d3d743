#include "seqbn/network_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "seqbn/errors.hpp"

namespace seqbn {
namespace {

struct Line {
    int number;
    std::vector<std::string> tokens;
};

std::vector<Line> tokenize(std::istream& in)
{
    std::vector<Line> lines;
    std::string raw;
    int number = 0;
    while (std::getline(in, raw)) {
        ++number;
        if (auto hash = raw.find('#'); hash != std::string::npos)
            raw.erase(hash);
        std::istringstream ss(raw);
        Line line{number, {}};
        for (std::string tok; ss >> tok;)
            line.tokens.push_back(tok);
        if (!line.tokens.empty())
            lines.push_back(std::move(line));
    }
    return lines;
}

int parse_int(const Line& line, const std::string& tok)
{
    int value = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
        throw ParseError(line.number, "expected an integer, got '" + tok + "'");
    return value;
}

double parse_prob(const Line& line, const std::string& tok)
{
    try {
        std::size_t used = 0;
        const double value = std::stod(tok, &used);
        if (used != tok.size())
            throw std::invalid_argument(tok);
        return value;
    } catch (const std::exception&) {
        throw ParseError(line.number, "expected a probability, got '" + tok + "'");
    }
}

} // namespace

BayesianNetwork parse_network(std::istream& in)
{
    const auto lines = tokenize(in);
    std::size_t pos = 0;
    auto expect = [&](const char* keyword) -> const Line& {
        if (pos >= lines.size())
            throw ParseError(lines.empty() ? 0 : lines.back().number, std::string("unexpected end of file, expected '") + keyword + "'");
        const Line& line = lines[pos++];
        if (line.tokens.front() != keyword)
            throw ParseError(line.number, std::string("expected '") + keyword + "', got '" + line.tokens.front() + "'");
        return line;
    };

    const Line& header = expect("vars");
    if (header.tokens.size() != 2)
        throw ParseError(header.number, "expected 'vars <n>'");
    const int n = parse_int(header, header.tokens[1]);
    if (n < 1)
        throw ParseError(header.number, "network needs at least one variable");

    std::vector<Variable> vars;
    for (int i = 0; i < n; ++i) {
        const Line& line = expect("var");
        if (line.tokens.size() != 3)
            throw ParseError(line.number, "expected 'var <name> <cardinality>'");
        vars.push_back({line.tokens[1], parse_int(line, line.tokens[2])});
    }
    VariableTable table;
    try {
        table = VariableTable(std::move(vars));
    } catch (const StructuralError& e) {
        throw ParseError(header.number, e.what());
    }

    auto lookup = [&](const Line& line, const std::string& name) {
        auto id = table.find(name);
        if (!id)
            throw ParseError(line.number, "unknown variable '" + name + "'");
        return *id;
    };

    std::vector<std::vector<int>> parents(static_cast<std::size_t>(n));
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    int structure_line = 0;
    for (int i = 0; i < n; ++i) {
        const Line& line = expect("parents");
        structure_line = line.number;
        if (line.tokens.size() < 2)
            throw ParseError(line.number, "expected 'parents <child> <parent>*'");
        const int child = lookup(line, line.tokens[1]);
        if (seen[static_cast<std::size_t>(child)]++)
            throw ParseError(line.number, "parents listed twice for '" + line.tokens[1] + "'");
        for (std::size_t t = 2; t < line.tokens.size(); ++t)
            parents[static_cast<std::size_t>(child)].push_back(lookup(line, line.tokens[t]));
    }
    Structure structure;
    try {
        structure = Structure::from_parents(std::move(parents));
    } catch (const StructuralError& e) {
        throw ParseError(structure_line, e.what());
    }

    std::vector<Cpt> cpts(static_cast<std::size_t>(n));
    std::vector<char> has_cpt(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
        const Line& head = expect("cpt");
        if (head.tokens.size() != 2)
            throw ParseError(head.number, "expected 'cpt <child>'");
        const int child = lookup(head, head.tokens[1]);
        if (has_cpt[static_cast<std::size_t>(child)]++)
            throw ParseError(head.number, "duplicate cpt block for '" + head.tokens[1] + "'");
        Cpt& c = cpts[static_cast<std::size_t>(child)];
        c.child = child;
        c.parents = structure.parents(child);
        c.child_cardinality = table.cardinality(child);
        const std::size_t rows = joint_state_count(table, c.parents);
        for (std::size_t r = 0; r < rows; ++r) {
            if (pos >= lines.size())
                throw ParseError(head.number, "cpt block for '" + head.tokens[1] + "' is truncated");
            const Line& line = lines[pos++];
            if (static_cast<int>(line.tokens.size()) != c.child_cardinality)
                throw ParseError(line.number, "expected " + std::to_string(c.child_cardinality) + " probabilities");
            double sum = 0.0;
            std::vector<double> row;
            for (const auto& tok : line.tokens) {
                const double p = parse_prob(line, tok);
                if (!(p >= 0.0 && p <= 1.0))
                    throw ParseError(line.number, "probability outside [0, 1]");
                row.push_back(p);
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-6)
                throw ParseError(line.number, "row does not sum to 1");
            const double scale = std::abs(sum - 1.0) > 1e-12 ? 1.0 / sum : 1.0;
            for (double p : row)
                c.table.push_back(p * scale);
        }
    }
    if (pos != lines.size())
        throw ParseError(lines[pos].number, "unexpected trailing content");
    return BayesianNetwork(std::move(table), std::move(structure), std::move(cpts));
}

BayesianNetwork read_network(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open network file " + path.string());
    return parse_network(in);
}

void write_network(std::ostream& out, const BayesianNetwork& net)
{
    const auto& vars = net.variables();
    out << "# format=1\n";
    out << "vars " << vars.size() << '\n';
    for (const auto& v : vars)
        out << "var " << v.name << ' ' << v.cardinality << '\n';
    for (int i = 0; i < vars.size(); ++i) {
        out << "parents " << vars[i].name;
        for (int p : net.structure().parents(i))
            out << ' ' << vars[p].name;
        out << '\n';
    }
    const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
    for (int i = 0; i < vars.size(); ++i) {
        const Cpt& c = net.cpt(i);
        out << "cpt " << vars[i].name << '\n';
        for (std::size_t r = 0; r < c.rows(); ++r) {
            const auto row = c.row(r);
            for (std::size_t x = 0; x < row.size(); ++x)
                out << (x ? " " : "") << row[x];
            out << '\n';
        }
    }
    out.precision(old_precision);
}

void write_network(const std::filesystem::path& path, const BayesianNetwork& net)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write network file " + path.string());
    write_network(out, net);
}

std::string to_string(const BayesianNetwork& net)
{
    std::ostringstream ss;
    write_network(ss, net);
    return ss.str();
}

} // namespace seqbn
