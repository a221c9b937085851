#include "relp/cli.hpp"
#include "relp/errors.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <unistd.h>

using namespace relp;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() / ("relp_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

fs::path write_market(const fs::path& dir, int n = 30, int m = 3) {
    std::mt19937_64 rng(2024);
    std::lognormal_distribution<double> d(0.0, 0.03);
    RelativesTable t(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) t(i, j) = d(rng);
    const fs::path p = dir / "market.csv";
    write_relatives(RelativesMatrix(t), p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream is(text);
    for (std::string l; std::getline(is, l);) out.push_back(l);
    return out;
}

std::vector<std::string> fields(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    for (std::string f; std::getline(is, f, ',');) out.push_back(f);
    return out;
}

int run(std::vector<std::string> args) {
    args.insert(args.begin(), "relp");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    return cli::run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("config file is overridden by flags") {
    TempDir tmp;
    const fs::path data = write_market(tmp.path);
    const fs::path cfg = tmp.path / "cfg.json";
    std::ofstream(cfg) << R"({"strategy": ["ucrp"], "gamma": [0.001], "kappa": 3.0, "output": ")"
                       << (tmp.path / "from_file").string() << "\"}";
    REQUIRE(run({"backtest", "--config", cfg.string(), "--data", data.string(), "--gamma", "0.002"}) == 0);
    CHECK(fs::exists(tmp.path / "from_file" / "ucrp_g0.002.csv"));
    CHECK_FALSE(fs::exists(tmp.path / "from_file" / "ucrp_g0.001.csv"));
    const auto j = nlohmann::json::parse(slurp(tmp.path / "from_file" / "ucrp_g0.002.json"));
    CHECK(j["periods"] == 30);
    CHECK(j["assets"] == 3);
    CHECK(j["strategy"] == "ucrp");
}

TEST_CASE("json config handling") {
    cli::RunConfig c;
    cli::apply_json(c, nlohmann::json::parse(R"({"kappa": 2.5, "gamma": [0.01, 0.02], "lambda": 0.3})"));
    CHECK(c.kappa == 2.5);
    CHECK(c.gammas == std::vector<double>{0.01, 0.02});
    CHECK(c.lambda == 0.3);
    CHECK(c.window == 5);
    CHECK_THROWS_AS(cli::apply_json(c, nlohmann::json::parse(R"({"kapa": 1})")), ConfigError);
    CHECK_THROWS_AS(cli::apply_json(c, nlohmann::json::parse(R"({"kappa": "big"})")), ConfigError);
    cli::RunConfig back;
    cli::apply_json(back, cli::to_json(c));
    CHECK(cli::to_json(back) == cli::to_json(c));
}

TEST_CASE("strategy registry") {
    const auto names = cli::known_strategies();
    CHECK(names.size() == 23);
    cli::RunConfig c;
    for (const auto& n : names) CHECK(cli::make_strategy(n, c, 0.002) != nullptr);
    CHECK_THROWS_AS(cli::make_strategy("relp-kappa-z", c, 0.0), cli::UnknownStrategy);
    try {
        cli::make_strategy("magic", c, 0.0);
    } catch (const cli::UnknownStrategy& e) {
        CHECK(std::string(e.what()).find("relp-adap-2") != std::string::npos);
    }
    CHECK(cli::run_stem("relp-fixed", 0.005) == "relp-fixed_g0.005");
}

TEST_CASE("exit codes") {
    TempDir tmp;
    const fs::path data = write_market(tmp.path);
    const std::string out = (tmp.path / "o").string();
    CHECK(run({"backtest", "--data", data.string(), "--strategy", "nope", "--output", out}) == 2);
    CHECK(run({"backtest", "--data", (tmp.path / "missing.csv").string(), "--strategy", "ucrp", "--output", out}) == 1);
    CHECK(run({"compare", "--data", data.string(), "--output", out}) == 1);
    CHECK(run({"backtest", "--data", data.string(), "--strategy", "ucrp", "--gamma", "1.5", "--output", out}) == 1);
}

TEST_CASE("sweep with a single cell matches a fixed backtest") {
    TempDir tmp;
    const fs::path data = write_market(tmp.path, 40, 3);
    const std::string out = (tmp.path / "s").string();
    REQUIRE(run({"sweep", "--data", data.string(), "--gamma", "0.002", "--sweep-kappa-min", "0.7", "--sweep-kappa-max",
                 "0.7", "--sweep-kappa-count", "1", "--sweep-lambda-min", "5", "--sweep-lambda-max", "5",
                 "--sweep-lambda-count", "1", "--output", out}) == 0);
    const auto rows = lines(slurp(fs::path(out) / "sweep.csv"));
    REQUIRE(rows.size() == 2);
    const auto f = fields(rows[1]);

    cli::RunConfig c;
    c.kappa = 0.7;
    c.lambda_multiplier = 5.0;
    c.gammas = {0.002};
    c.parallel = false;
    const auto runs = cli::run_all(load_relatives(data, CsvFormat::relatives), {"relp-fixed"}, c);
    CHECK(f[5] == format_double(runs[0].report.cumulative_wealth));
    CHECK(f[6] == format_metric(runs[0].report.sharpe_daily));
    CHECK(f[7] == format_metric(runs[0].report.max_drawdown));
}

TEST_CASE("default sweep grid and zero-lambda flags") {
    TempDir tmp;
    const fs::path data = write_market(tmp.path, 8, 2);
    const std::string out = (tmp.path / "s").string();
    REQUIRE(run({"sweep", "--data", data.string(), "--gamma", "0,0.01", "--output", out}) == 0);
    const auto rows = lines(slurp(fs::path(out) / "sweep.csv"));
    REQUIRE(rows.size() == 1 + 2 * 861);
    CHECK(rows[0] == "gamma,kappa,lambda_multiplier,lambda,lambda_zero,cumulative_wealth,sharpe_daily,max_drawdown,calmar");
    std::size_t zero = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto f = fields(rows[i]);
        if (f[4] == "1") {
            ++zero;
            CHECK(f[0] == "0");
        }
    }
    CHECK(zero == 861);
}

TEST_CASE("compare writes metrics and rankings deterministically") {
    TempDir tmp;
    const fs::path data = write_market(tmp.path, 30, 3);
    auto go = [&](const std::string& dir, const std::string& parallel) {
        return run({"compare", "--data", data.string(), "--strategy", "ubah,ucrp,relp-fixed,ucrp,relp-kappa-e",
                    "--gamma", "0,0.005", "--kappa-count", "3", "--top-k", "2", "--output", (tmp.path / dir).string(), "--parallel",
                    parallel});
    };
    REQUIRE(go("a", "true") == 0);
    REQUIRE(go("b", "false") == 0);
    const auto metrics = lines(slurp(tmp.path / "a" / "compare_metrics.csv"));
    REQUIRE(metrics.size() == 1 + 2 * 4);
    CHECK(fields(metrics[1])[0] == "ubah");
    CHECK(fields(metrics[1])[1] == "0");
    CHECK(fields(metrics[5])[1] == "0.005");
    for (const auto& entry : fs::directory_iterator(tmp.path / "a")) {
        const fs::path other = tmp.path / "b" / entry.path().filename();
        REQUIRE(fs::exists(other));
        CHECK(slurp(entry.path()) == slurp(other));
    }
    CHECK(fs::exists(tmp.path / "a" / "relp-kappa-e_g0.005_trace.csv"));
    const auto ranking = lines(slurp(tmp.path / "a" / "ranking_cumulative_wealth.csv"));
    CHECK(ranking.size() == 1 + 4);
    // UBAH is the market, so its excess return is exactly zero.
    CHECK(fields(metrics[1])[3] == "0");
}
