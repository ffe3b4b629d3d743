#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "seqbn/dataset.hpp"
#include "seqbn/errors.hpp"
#include "seqbn/experiment.hpp"
#include "seqbn/network_io.hpp"

using namespace seqbn;
namespace fs = std::filesystem;

namespace {

const fs::path kNets = SEQBN_NETWORK_DIR;

struct TempDir {
    fs::path path;
    TempDir()
    {
        static int counter = 0;
        path = fs::temp_directory_path() / ("seqbn_harness_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

/// Runs the CLI; returns its exit status. stderr goes to `log` when given.
int cli(const std::string& args, const fs::path& log = {})
{
    std::string cmd = std::string(SEQBN_CLI) + " " + args;
    cmd += log.empty() ? " 2>/dev/null" : " 2>" + log.string();
    cmd += " >/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t data_lines(const fs::path& p)
{
    std::ifstream in(p);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line))
        n += !line.empty() && line.front() != '#';
    return n;
}

} // namespace

TEST_CASE("dataset parsing")
{
    std::istringstream good("# format=1\nA:2,B:3\n0,2\n?,1\n\n1,?\n");
    const auto ds = parse_dataset(good);
    CHECK(ds.vars.size() == 2);
    CHECK(ds.vars.cardinality(1) == 3);
    REQUIRE(ds.rows.size() == 3);
    CHECK_FALSE(ds.rows[1][0]);
    CHECK(*ds.rows[1][1] == 1);
    CHECK_FALSE(ds.complete());
    CHECK_THROWS_AS(ds.complete_rows(), SchemaError);

    auto error_of = [](const std::string& text) {
        std::istringstream in(text);
        try {
            parse_dataset(in);
        } catch (const SchemaError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(error_of("A:2,B:2\n0,1,1\n").find("line 2") != std::string::npos);
    CHECK(error_of("A:2,B:2\n0,2\n").find("out of range") != std::string::npos);
    CHECK(error_of("A:2,B\n").find("line 1") != std::string::npos);
    CHECK(error_of("A:2,B:2\n0,x\n").find("bad value") != std::string::npos);
    CHECK_FALSE(error_of("").empty());
}

TEST_CASE("dataset round trip and MCAR masking")
{
    const auto net = oracle::load("net6.net");
    const auto data = sample_instances(net, 10'000, 3);
    const auto masked = hide_mcar(data, 0.1, 4);
    std::size_t hidden = 0, total = 0;
    for (const auto& row : masked)
        for (const auto& v : row) {
            hidden += !v;
            ++total;
        }
    CHECK(std::abs(static_cast<double>(hidden) / static_cast<double>(total) - 0.1) <= 0.01);
    std::stringstream io;
    write_dataset(io, net.variables(), masked);
    const auto back = parse_dataset(io);
    CHECK(back.vars == net.variables());
    CHECK(back.rows == masked);
    CHECK_THROWS_AS(hide_mcar(data, 1.0, 1), ConfigError);
}

TEST_CASE("experiment spec validation")
{
    ExperimentSpec spec;
    spec.network = kNets / "chain3.net";
    spec.seeds = {1, 2};
    CHECK_THROWS_AS(validate(spec), ConfigError);
    spec.seeds.clear();
    spec.missing = 1.0;
    CHECK_THROWS_AS(validate(spec), ConfigError);
    spec.missing = 0.0;
    CHECK_NOTHROW(validate(spec));
    CHECK(dataset_seeds(spec) == std::vector<std::uint64_t>{1, 2, 3, 4, 5});
}

TEST_CASE("cli sample")
{
    TempDir tmp;
    const auto net = (kNets / "net6.net").string();
    SUBCASE("zero count writes only the header")
    {
        REQUIRE(cli("sample --net " + net + " --count 0 --out " + (tmp.path / "empty.csv").string()) == 0);
        CHECK(data_lines(tmp.path / "empty.csv") == 1);
    }
    SUBCASE("a fixed seed gives identical files")
    {
        const auto a = tmp.path / "a.csv", b = tmp.path / "b.csv";
        REQUIRE(cli("sample --net " + net + " --count 500 --seed 9 --out " + a.string()) == 0);
        REQUIRE(cli("sample --net " + net + " --count 500 --seed 9 --out " + b.string()) == 0);
        CHECK(slurp(a) == slurp(b));
        CHECK(data_lines(a) == 501);
    }
    SUBCASE("missingness rate")
    {
        const auto p = tmp.path / "m.csv";
        REQUIRE(cli("sample --net " + net + " --count 10000 --seed 2 --missing 0.1 --out " + p.string()) == 0);
        const auto ds = read_dataset(p);
        std::size_t hidden = 0;
        for (const auto& row : ds.rows)
            for (const auto& v : row)
                hidden += !v;
        CHECK(std::abs(static_cast<double>(hidden) / 60'000.0 - 0.1) <= 0.01);
    }
    SUBCASE("malformed network reports the line")
    {
        const auto bad = tmp.path / "bad.net";
        std::ofstream(bad) << "vars 2\nvar A 2\nvar B two\n";
        const auto log = tmp.path / "log.txt";
        CHECK(cli("sample --net " + bad.string() + " --count 3 --out " + (tmp.path / "x.csv").string(), log) == 2);
        CHECK(slurp(log).find("line 3") != std::string::npos);
    }
}

TEST_CASE("cli learn")
{
    TempDir tmp;
    const auto net = (kNets / "chain3.net").string();
    const auto data = tmp.path / "d.csv";
    REQUIRE(cli("sample --net " + net + " --count 1500 --seed 5 --out " + data.string()) == 0);

    SUBCASE("empty dataset returns the initial network")
    {
        const auto empty = tmp.path / "e.csv";
        REQUIRE(cli("sample --net " + net + " --count 0 --out " + empty.string()) == 0);
        const auto out = tmp.path / "out_empty";
        REQUIRE(cli("learn --data " + empty.string() + " --net " + net + " --out " + out.string()) == 0);
        CHECK(slurp(out / "final.net") == to_string(oracle::load("chain3.net")));
        CHECK(data_lines(out / "trace.csv") == 1);
    }
    SUBCASE("EM with alpha 1 on complete data matches the incremental learner")
    {
        const auto a = tmp.path / "em", b = tmp.path / "inc";
        REQUIRE(cli("learn --data " + data.string() + " --em --alpha 1 --n0 0 --k 100 --out " + a.string()) == 0);
        REQUIRE(cli("learn --data " + data.string() + " --incremental --k 100 --out " + b.string()) == 0);
        CHECK(slurp(a / "final.net") == slurp(b / "final.net"));
    }
    SUBCASE("replays are byte-identical")
    {
        const auto a = tmp.path / "r1", b = tmp.path / "r2";
        const std::string flags = " --strategy map --k 200 --truth " + net + " --seed 3";
        REQUIRE(cli("learn --data " + data.string() + flags + " --out " + a.string()) == 0);
        REQUIRE(cli("learn --data " + data.string() + flags + " --out " + b.string()) == 0);
        CHECK(slurp(a / "final.net") == slurp(b / "final.net"));
        CHECK(slurp(a / "trace.csv") == slurp(b / "trace.csv"));
        CHECK(data_lines(a / "trace.csv") == 1501);
    }
    SUBCASE("variable mismatch is a schema error")
    {
        const auto log = tmp.path / "log.txt";
        CHECK(cli("learn --data " + data.string() + " --net " + (kNets / "net4.net").string() + " --out " +
                      (tmp.path / "x").string(),
                  log) == 2);
        CHECK(slurp(log).find("do not match") != std::string::npos);
    }
    SUBCASE("bad options are rejected")
    {
        CHECK(cli("learn --data " + data.string() + " --strategy greedy --out " + (tmp.path / "x").string()) != 0);
        CHECK(cli("learn --data " + data.string() + " --score bic --out " + (tmp.path / "x").string()) != 0);
        CHECK(cli("learn --data " + data.string() + " --k 0 --out " + (tmp.path / "x").string()) != 0);
    }
}

TEST_CASE("cli run")
{
    TempDir tmp;
    const auto net = (kNets / "chain3.net").string();
    SUBCASE("single strategy, single dataset")
    {
        const auto out = tmp.path / "one";
        REQUIRE(cli("run --net " + net + " --datasets 1 --instances 700 --strategies incremental --k 100 --out " +
                    out.string()) == 0);
        const auto trace = out / "traces" / "incremental_avg-bde_k100_d0.csv";
        REQUIRE(fs::exists(trace));
        CHECK(data_lines(trace) == 701);
        CHECK(data_lines(out / "windows" / "incremental_avg-bde_k100.csv") == 1 + 3);
        CHECK(data_lines(out / "summary.tsv") == 2);
        CHECK(data_lines(out / "datasets" / "data_0.csv") == 701);
        CHECK(slurp(out / "seeds.tsv").find("0\t1") != std::string::npos);
    }
    SUBCASE("outputs are a function of the spec and seeds")
    {
        const auto a = tmp.path / "a", b = tmp.path / "b";
        const std::string args = " --net " + net + " --datasets 2 --instances 300 --k 100 --seeds 7,8 --threads 2";
        REQUIRE(cli("run" + args + " --out " + a.string()) == 0);
        REQUIRE(cli("run" + args + " --out " + b.string()) == 0);
        for (const auto& entry : fs::recursive_directory_iterator(a)) {
            if (!entry.is_regular_file())
                continue;
            const auto rel = fs::relative(entry.path(), a);
            CHECK(slurp(entry.path()) == slurp(b / rel));
        }
        CHECK(slurp(a / "seeds.tsv").find("1\t8") != std::string::npos);
    }
    SUBCASE("a failing cell keeps the other results and exits nonzero")
    {
        const auto out = tmp.path / "fail";
        // The naive learner cannot take missing values; the EM learner can.
        CHECK(cli("run --net " + net + " --datasets 1 --instances 200 --missing 0.2 --strategies naive,em --k 100 --out " +
                  out.string()) == 1);
        CHECK(fs::exists(out / "traces" / "em_avg-bde_k100_d0.csv"));
        CHECK_FALSE(fs::exists(out / "traces" / "naive_bde_k100_d0.csv"));
        CHECK(slurp(out / "summary.tsv").find("naive\t100\tbde\tnan") != std::string::npos);
    }
}
