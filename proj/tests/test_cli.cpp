#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "gaussfpt/cli.hpp"
#include "gaussfpt/csv.hpp"
#include "gaussfpt/errors.hpp"
#include "json.hpp"

using namespace gaussfpt;
namespace fs = std::filesystem;

namespace {

/// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("gaussfpt_test_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

struct RunResult {
    int code;
    std::string out;
    std::string err;
};

RunResult run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "gaussfpt");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string config_error(const ExperimentConfig& cfg) {
    try {
        validate_config(cfg);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("config file parsing") {
    TempDir dir("config");
    const fs::path file = dir.path / "exp.cfg";
    std::ofstream(file) << "# comment\n\ncovariance.a = 0.5   # trailing\nboundary.kind = sinusoidal\n"
                           "boundary.B=0.25\nrice.orders = 1, 2\ncheck.ladder = 2,3,5\n"
                           "compare.synthetic = true\nsim.seed = 18446744073709551615\n";
    ExperimentConfig cfg;
    load_config_file(cfg, file);
    CHECK(cfg.a == 0.5);
    CHECK(cfg.boundary_kind == "sinusoidal");
    CHECK(cfg.B == 0.25);
    CHECK(cfg.rice_orders == std::vector<int>{1, 2});
    CHECK(cfg.check_ladder == std::vector<double>{2.0, 3.0, 5.0});
    CHECK(cfg.synthetic);
    CHECK(cfg.seed == 18446744073709551615ull);

    std::ofstream(file) << "covariance.a = 1\nboundary.bogus = 3\n";
    try {
        load_config_file(cfg, file);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("exp.cfg:2") != std::string::npos);
        CHECK(msg.find("boundary.bogus") != std::string::npos);
    }
    std::ofstream(file) << "grid.dt = fast\n";
    try {
        load_config_file(cfg, file);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("grid.dt") != std::string::npos);
    }
    std::ofstream(file) << "grid.dt 0.1\n";
    CHECK_THROWS_AS(load_config_file(cfg, file), ConfigError);
    CHECK_THROWS_AS(load_config_file(cfg, dir.path / "missing.cfg"), ConfigError);
}

TEST_CASE("config validation names the field") {
    const auto expect = [](auto mutate, const std::string& field) {
        ExperimentConfig cfg;
        mutate(cfg);
        const std::string msg = config_error(cfg);
        INFO(msg);
        CHECK(msg.rfind(field + ":", 0) == 0);
    };
    CHECK(config_error(ExperimentConfig{}).empty());
    expect([](ExperimentConfig& c) { c.a = 0.0; }, "covariance.a");
    expect([](ExperimentConfig& c) { c.omega = -1.0; }, "covariance.omega");
    expect([](ExperimentConfig& c) { c.boundary_kind = "wavy"; }, "boundary.kind");
    expect([](ExperimentConfig& c) { c.boundary_kind = "sinusoidal"; c.Q = 0.0; }, "boundary.Q");
    expect([](ExperimentConfig& c) { c.boundary_kind = "custom"; c.lambda = 0.0; }, "boundary.lambda");
    expect([](ExperimentConfig& c) { c.x0 = 2.0; }, "x0");
    expect([](ExperimentConfig& c) { c.boundary_kind = "custom"; c.C = -1.0; c.x0 = 1.5; }, "x0");
    expect([](ExperimentConfig& c) { c.dt = 0.0; }, "grid.dt");
    expect([](ExperimentConfig& c) { c.dt = 1.0; }, "grid.dt");
    expect([](ExperimentConfig& c) { c.t_max = -1.0; }, "grid.t_max");
    expect([](ExperimentConfig& c) { c.n_paths = 0; }, "sim.n_paths");
    expect([](ExperimentConfig& c) { c.batch_size = 0; }, "sim.batch_size");
    expect([](ExperimentConfig& c) { c.bin_width = 0.0; }, "sim.bin_width");
    expect([](ExperimentConfig& c) { c.rice_orders = {4}; }, "rice.orders");
    expect([](ExperimentConfig& c) { c.rice_max_nodes = 40; }, "rice.max_nodes");
    expect([](ExperimentConfig& c) { c.compare_t_hi = 5.0; }, "compare.t_hi");
    expect([](ExperimentConfig& c) { c.check_ladder = {3.0, 2.0}; }, "check.ladder");
    expect([](ExperimentConfig& c) { c.curves = {"plot"}; }, "outputs.curves");
}

TEST_CASE("CSV round trip") {
    CsvTable t;
    t.metadata = {{"seed", "7"}, {"note", "x=y"}};
    t.columns = {"t", "v"};
    t.rows = {{0.1, 1.0 / 3.0}, {1e-300, -2.5e17}, {std::nextafter(1.0, 2.0), 0.0}};
    const std::string text = to_csv_string(t);
    CHECK(text.find('\r') == std::string::npos);
    const CsvTable back = parse_csv(text);
    CHECK(back.columns == t.columns);
    CHECK(back.rows == t.rows);
    CHECK(back.meta("seed") == "7");
    CHECK(back.meta("note") == "x=y");
    CHECK(to_csv_string(back) == text);
    CHECK_THROWS_AS(back.column("missing"), ConfigError);
    TempDir dir("csv");
    write_csv(dir.path / "sub" / "t.csv", t);
    CHECK(read_csv(dir.path / "sub" / "t.csv").rows == t.rows);
}

TEST_CASE("w1 command") {
    TempDir dir("w1");
    const auto r = run_cli({"w1", "--out", dir.path.string(), "--grid.dt", "0.05"});
    REQUIRE(r.code == 0);
    const CsvTable t = read_csv(dir.path / "w1.csv");
    CHECK(t.columns == std::vector<std::string>{"t", "w1"});
    CHECK(t.rows.front()[1] == 0.0);
    CHECK(t.rows.back()[0] == doctest::Approx(50.0).epsilon(1e-12));
    CHECK(std::abs(t.rows.back()[1] - 0.0304611) < 1e-4);
    CHECK(t.meta("command") == "w1");
    CHECK(t.meta("version") == kVersion);
}

TEST_CASE("asymp command") {
    TempDir dir("asymp");
    const auto r = run_cli({"asymp", "--out", dir.path.string(), "--boundary.kind", "sinusoidal",
                            "--boundary.B", "0.5", "--grid.t_max", "60", "--grid.dt", "0.005"});
    REQUIRE(r.code == 0);
    const CsvTable t = read_csv(dir.path / "asymp.csv");
    CHECK(t.columns == std::vector<std::string>{"t", "R", "phi", "beta", "g_approx"});
    const auto beta = t.column("beta");
    const auto g = t.column("g_approx");
    const std::size_t period_rows = 600;
    for (std::size_t i = 0; i + period_rows < beta.size(); i += 37)
        CHECK(beta[i + period_rows] == doctest::Approx(beta[i]).epsilon(1e-9));
    double mass = 0.0;
    for (std::size_t i = 1; i < g.size(); ++i) mass += 0.5 * 0.005 * (g[i] + g[i - 1]);
    std::ifstream js(dir.path / "asymp.json");
    const auto j = nlohmann::json::parse(js);
    CHECK(j["kind"] == "periodic");
    CHECK(std::abs(mass - (1.0 - std::exp(-j["h_t_max"].get<double>()))) < 1e-6);
}

TEST_CASE("degenerate sinusoid equals the constant boundary") {
    TempDir dir("degenerate");
    const std::string a = (dir.path / "a").string();
    const std::string b = (dir.path / "b").string();
    for (const char* cmd : {"asymp", "simulate"}) {
        REQUIRE(run_cli({cmd, "--out", a, "--grid.t_max", "20", "--paths", "400"}).code == 0);
        REQUIRE(run_cli({cmd, "--out", b, "--grid.t_max", "20", "--paths", "400", "--boundary.kind",
                         "sinusoidal", "--boundary.B", "0"}).code == 0);
    }
    for (const char* file : {"asymp.csv", "ghat.csv"}) {
        const CsvTable ta = read_csv(fs::path(a) / file);
        const CsvTable tb = read_csv(fs::path(b) / file);
        CHECK(ta.rows == tb.rows);
    }
}

TEST_CASE("simulate is byte-identical for a fixed seed") {
    TempDir dir("determinism");
    std::vector<std::string> outputs;
    for (const char* threads : {"1", "4", "16", "1"}) {
        const std::string out = (dir.path / threads).string();
        REQUIRE(run_cli({"simulate", "--out", out, "--seed", "9", "--paths", "2000",
                         "--sim.batch_size", "100", "--grid.t_max", "30", "--sim.threads", threads})
                    .code == 0);
        outputs.push_back(slurp(fs::path(out) / "ghat.csv"));
    }
    CHECK(outputs[0] == outputs[1]);
    CHECK(outputs[0] == outputs[2]);
    CHECK(outputs[0] == outputs[3]);
    const CsvTable t = parse_csv(outputs[0]);
    CHECK(t.columns == std::vector<std::string>{"t_bin_center", "density", "ci99", "count"});
    CHECK(t.meta("sim.seed") == "9");
    CHECK(t.meta("sim.n_paths") == "2000");
    CHECK_THROWS_AS(t.meta("sim.threads"), ConfigError);
}

TEST_CASE("synthetic compare recovers the rate") {
    TempDir dir("synthetic");
    ExperimentConfig cfg;
    cfg.out_dir = dir.path.string();
    cfg.synthetic = true;
    cfg.S0 = 2.5;
    cfg.t_max = 400.0;
    cfg.compare_t_lo = 50.0;
    cfg.compare_t_hi = 300.0;
    const ComparisonReport r = cmd_compare(cfg);
    CHECK(r.tail_rate_rel_error < 0.01);
    // Only the rounding of expected counts separates data and approximation.
    CHECK(r.l1 <= 0.5 * static_cast<double>(r.z_scores.size()) / cfg.n_paths);
    CHECK(r.reference_rate == doctest::Approx(0.00988928).epsilon(1e-5));
    const CsvTable t = read_csv(dir.path / "compare.csv");
    CHECK(t.columns == std::vector<std::string>{"t", "ghat", "g_approx", "w1"});
    CHECK(t.meta("data") == "synthetic");

    cfg.boundary_kind = "sinusoidal";
    cfg.S0 = 2.0;
    cfg.B = 0.5;
    cfg.t_max = 120.0;
    cfg.compare_t_lo = 12.0;
    cfg.compare_t_hi = 74.0;
    const ComparisonReport p = cmd_compare(cfg);
    CHECK(p.fit_t_hi == doctest::Approx(72.0).epsilon(1e-12));
    CHECK(p.tail_rate_rel_error < 0.01);
    CHECK(p.tail_bins == 20);
    CHECK(p.l1 < p.l1_const);
}

TEST_CASE("compare with partial sums") {
    TempDir dir("partial");
    const auto r = run_cli({"compare", "--out", dir.path.string(), "--compare.synthetic", "true",
                            "--rice.orders", "1,2", "--rice.t_max", "1", "--rice.simplex_nodes", "8",
                            "--sim.bin_width", "0.5", "--grid.t_max", "200"});
    REQUIRE(r.code == 0);
    const CsvTable t = read_csv(dir.path / "compare.csv");
    CHECK(t.columns == std::vector<std::string>{"t", "ghat", "g_approx", "w1", "a1", "a2"});
    const auto a1 = t.column("a1");
    const auto a2 = t.column("a2");
    CHECK(a1[0] == t.column("w1")[0]);
    CHECK(a2[1] <= a1[1]);
    CHECK(std::isnan(a1[2]));
    std::ifstream js(dir.path / "compare_report.json");
    const auto j = nlohmann::json::parse(js);
    CHECK(j.contains("tail_rate_rel_error"));
    CHECK(j["z_scores"].size() == j["z_centers"].size());
}

TEST_CASE("figure configurations") {
    ExperimentConfig base;
    base.out_dir = "bundle";
    CHECK(figure_configs(1, base).at(0).boundary_kind == "constant");
    const auto two = figure_configs(2, base);
    REQUIRE(two.size() == 2);
    CHECK(two[0].S0 == 2.0);
    CHECK(two[1].S0 == 2.5);
    CHECK(two[0].out_dir != two[1].out_dir);
    const double expected[][3] = {{2.0, 0.5, 3.0}, {2.0, 0.1, 3.0}, {2.0, 0.5, 3.0},
                                  {2.0, 1.0, 3.0}, {2.5, 0.1, 3.0}};
    for (int id = 3; id <= 7; ++id) {
        const auto cfgs = figure_configs(id, base);
        REQUIRE(cfgs.size() == 1);
        CHECK(cfgs[0].boundary_kind == "sinusoidal");
        CHECK(cfgs[0].S0 == expected[id - 3][0]);
        CHECK(cfgs[0].B == expected[id - 3][1]);
        CHECK(cfgs[0].Q == expected[id - 3][2]);
        CHECK(cfgs[0].x0 == 0.0);
        CHECK(cfgs[0].a == 1.0);
        CHECK(cfgs[0].omega == 1.0);
        CHECK_NOTHROW(validate_config(cfgs[0]));
    }
    CHECK_THROWS_AS(figure_configs(0, base), ConfigError);
    CHECK_THROWS_AS(figure_configs(8, base), ConfigError);
}

TEST_CASE("figures bundle") {
    TempDir dir("figures");
    const auto r = run_cli({"figures", "2", "--out", dir.path.string(), "--compare.synthetic", "true",
                            "--outputs.curves", "w1,asymp,compare", "--grid.dt", "0.05"});
    REQUIRE(r.code == 0);
    for (const char* sub : {"S0_2", "S0_2.5"}) {
        const fs::path p = dir.path / "fig2" / sub;
        CHECK(fs::exists(p / "config.txt"));
        CHECK(fs::exists(p / "w1.csv"));
        CHECK(fs::exists(p / "asymp.csv"));
        CHECK(fs::exists(p / "compare.csv"));
        CHECK_FALSE(fs::exists(p / "ghat.csv"));
    }
    CHECK(run_cli({"figures", "--id", "9"}).code == kExitConfig);
}

TEST_CASE("check command") {
    TempDir dir("check");
    const auto ok = run_cli({"check", "--out", dir.path.string(), "--boundary.kind", "sinusoidal",
                             "--boundary.B", "0.5"});
    REQUIRE(ok.code == 0);
    CHECK(ok.out.find("monotone") != std::string::npos);
    CHECK(fs::exists(dir.path / "check_report.json"));
    const auto bad = run_cli({"check", "--out", dir.path.string(), "--boundary.kind", "custom",
                              "--boundary.C", "0.5", "--boundary.lambda", "0.001", "--check.ladder",
                              "2,3"});
    CHECK(bad.code == kExitConfig);
    CHECK(bad.err.find("growth ratio") != std::string::npos);
}

TEST_CASE("exit codes") {
    CHECK(run_cli({}).code == kExitConfig);
    CHECK(run_cli({"w1", "--no-such-flag"}).code == kExitConfig);
    CHECK(run_cli({"w1", "--grid.dt", "abc"}).code == kExitConfig);
    const auto x0 = run_cli({"w1", "--x0", "3"});
    CHECK(x0.code == kExitConfig);
    CHECK(x0.err.find("x0") != std::string::npos);
    CHECK(run_cli({"--version"}).code == kExitOk);
    TempDir dir("exit");
    // A horizon too short for ten fit bins leaves the tail fit without data.
    CHECK(run_cli({"compare", "--out", dir.path.string(), "--compare.synthetic", "true",
                   "--grid.t_max", "5", "--compare.t_lo", "1"}).code == kExitInsufficient);
}
