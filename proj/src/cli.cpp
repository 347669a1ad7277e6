#include "gaussfpt/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "gaussfpt/csv.hpp"
#include "gaussfpt/errors.hpp"
#include "gaussfpt/rice.hpp"
#include "json.hpp"

namespace gaussfpt {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<std::pair<std::string, std::string>> metadata(const ExperimentConfig& cfg,
                                                          const std::string& command) {
    std::vector<std::pair<std::string, std::string>> meta{{"command", command},
                                                          {"version", kVersion}};
    for (auto& kv : describe_config(cfg)) meta.push_back(std::move(kv));
    return meta;
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError(path.string() + ": cannot open for writing");
    out << text;
    if (!out) throw ConfigError(path.string() + ": write failed");
}

/// Finite doubles as numbers, others as strings, so the JSON stays valid.
json number(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);
}

struct SimulationOutput {
    FptHistogram hist;
    bool synthetic = false;
};

SimulationOutput simulate_or_synthesize(const ExperimentConfig& cfg, const CovarianceModel& cov,
                                        const Boundary& b, bool allow_synthetic) {
    const PathGrid grid = make_grid(cfg);
    if (allow_synthetic && cfg.synthetic) {
        const AsymptoticApproximation approx(cov, b);
        return {synthetic_histogram(approx, grid, cfg.n_paths, cfg.bin_width), true};
    }
    return {estimate_density(cov, b, grid, make_sim(cfg), cfg.bin_width), false};
}

void add_sim_metadata(CsvTable& table, const FptHistogram& h, bool synthetic) {
    table.metadata.emplace_back("data", synthetic ? "synthetic" : "simulated");
    table.metadata.emplace_back("n_censored", std::to_string(h.n_censored));
    table.metadata.emplace_back("censored_fraction", format_double(h.censored_fraction()));
}

fs::path write_ghat(const ExperimentConfig& cfg, const SimulationOutput& sim) {
    CsvTable table;
    table.metadata = metadata(cfg, "simulate");
    add_sim_metadata(table, sim.hist, sim.synthetic);
    table.columns = {"t_bin_center", "density", "ci99", "count"};
    const auto& h = sim.hist;
    for (std::size_t i = 0; i < h.size(); ++i)
        table.rows.push_back({h.center(i), h.density[i], h.ci_halfwidth[i],
                              static_cast<double>(h.bin_counts[i])});
    const fs::path path = fs::path(cfg.out_dir) / "ghat.csv";
    write_csv(path, table);
    return path;
}

ComparisonReport write_compare(const ExperimentConfig& cfg, const CovarianceModel& cov,
                               const Boundary& b, const SimulationOutput& sim) {
    const auto& h = sim.hist;
    const AsymptoticApproximation approx(cov, b);
    const auto gbar = bin_averaged_approx(approx, h);
    const int order = *std::max_element(cfg.rice_orders.begin(), cfg.rice_orders.end());

    SimplexQuadConfig grid;
    grid.nodes = cfg.simplex_nodes;
    grid.inner.nodes = cfg.rice_nodes;
    grid.inner.max_nodes = cfg.rice_max_nodes;

    CsvTable table;
    table.metadata = metadata(cfg, "compare");
    add_sim_metadata(table, h, sim.synthetic);
    table.metadata.emplace_back("g_approx", "bin average");
    table.columns = {"t", "ghat", "g_approx", "w1"};
    if (order >= 2) {
        table.columns.push_back("a1");
        table.columns.push_back("a2");
    }
    if (order >= 3) table.columns.push_back("a3");
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double t = h.center(i);
        std::vector<double> row{t, h.density[i], gbar[i], w1(cov, b, t, cfg.x0)};
        if (order >= 2) {
            if (t <= cfg.rice_t_max) {
                const auto ev = partial_sum(cov, b, cfg.x0, t, order, grid);
                for (int r = 0; r < order; ++r) row.push_back(ev.partial_sums[r]);
            } else {
                for (int r = 0; r < order; ++r) row.push_back(nan);
            }
        }
        table.rows.push_back(std::move(row));
    }
    write_csv(fs::path(cfg.out_dir) / "compare.csv", table);

    const double t_hi = cfg.compare_t_hi > 0.0 ? cfg.compare_t_hi : h.edges.back();
    const ComparisonReport report =
        compare_histogram(h, approx, r_const(cov, cfg.S0), cfg.compare_t_lo, t_hi);
    write_text(fs::path(cfg.out_dir) / "compare_report.json", report_json(report) + "\n");
    return report;
}

fs::path write_config_dump(const ExperimentConfig& cfg) {
    std::string text;
    for (const auto& [k, v] : describe_config(cfg)) text += k + " = " + v + "\n";
    const fs::path path = fs::path(cfg.out_dir) / "config.txt";
    write_text(path, text);
    return path;
}

std::string figure_label(double S0) {
    std::ostringstream os;
    os << "S0_" << S0;
    return os.str();
}

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::config: return kExitConfig;
        case ErrorKind::numerical: return kExitNumerical;
        case ErrorKind::insufficient_data: return kExitInsufficient;
    }
    return kExitNumerical;
}

}  // namespace

std::vector<double> bin_averaged_approx(const AsymptoticApproximation& approx,
                                        const FptHistogram& h) {
    std::vector<double> out(h.size());
    for (std::size_t i = 0; i < h.size(); ++i)
        out[i] = (approx.survival(h.edges[i]) - approx.survival(h.edges[i + 1])) / h.width(i);
    return out;
}

ComparisonReport compare_histogram(const FptHistogram& h, const AsymptoticApproximation& approx,
                                   double S0_rate, double t_lo, double t_hi) {
    if (!(t_lo < t_hi)) throw ConfigError("compare window needs t_lo < t_hi");
    ComparisonReport r;
    r.t_lo = t_lo;
    r.t_hi = t_hi;
    r.censored_fraction = h.censored_fraction();
    const auto gbar = bin_averaged_approx(approx, h);
    const double N = static_cast<double>(h.n_paths);
    const double eps = 1e-9 * std::max(1.0, t_hi);
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double a = h.edges[i];
        const double b = h.edges[i + 1];
        if (a < t_lo - eps || b > t_hi + eps) continue;
        const double w = b - a;
        const double gconst = (std::exp(-S0_rate * a) - std::exp(-S0_rate * b)) / w;
        r.mass_in_window += h.density[i] * w;
        r.l1 += std::abs(h.density[i] - gbar[i]) * w;
        r.l1_const += std::abs(h.density[i] - gconst) * w;
        const double p = gbar[i] * w;
        const double sd = std::sqrt(std::max(p * (1.0 - p), 0.0) / N) / w;
        r.z_centers.push_back(h.center(i));
        r.z_scores.push_back(sd > 0.0 ? (h.density[i] - gbar[i]) / sd : 0.0);
    }
    r.fit_t_hi = t_hi;
    TailFit fit;
    if (approx.kind() == ApproxKind::periodic) {
        // Per-period masses of beta(t) e^{-alpha t} decay exactly like e^{-alpha k Q}, whereas a
        // bin-level fit keeps an O(1 / periods^2) bias from the slope of log beta within a period.
        const double Q = approx.period();
        const auto whole = static_cast<std::size_t>(std::floor((t_hi - t_lo) / Q + 1e-9));
        if (whole == 0) throw InsufficientData("compare window is shorter than one period");
        r.fit_t_hi = t_lo + static_cast<double>(whole) * Q;
        std::vector<double> edges(whole + 1);
        for (std::size_t k = 0; k <= whole; ++k) edges[k] = t_lo + static_cast<double>(k) * Q;
        const FptHistogram periods = rebin(h, edges);
        fit = tail_rate_fit(periods, t_lo, r.fit_t_hi);
    } else {
        fit = tail_rate_fit(h, t_lo, t_hi);
    }
    r.tail_rate = fit.rate;
    r.tail_rate_se = fit.standard_error;
    r.tail_bins = fit.bins_used;
    r.reference_rate = approx.alpha();
    r.tail_rate_rel_error = std::abs(fit.rate - r.reference_rate) / r.reference_rate;
    return r;
}

FptHistogram synthetic_histogram(const AsymptoticApproximation& approx, const PathGrid& grid,
                                 std::size_t n_paths, double bin_width) {
    FptSample empty;
    empty.n_paths = n_paths;
    empty.t_max = grid.t_max();
    empty.dt = grid.dt;
    FptHistogram h = make_histogram(empty, bin_width);
    const double N = static_cast<double>(n_paths);
    std::size_t total = 0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double mass = approx.survival(h.edges[i]) - approx.survival(h.edges[i + 1]);
        h.bin_counts[i] = static_cast<std::size_t>(std::llround(N * mass));
        total += h.bin_counts[i];
    }
    if (total > n_paths) throw ConfigError("synthetic counts exceed the path count");
    h.n_censored = n_paths - total;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double w = h.width(i);
        const double p = static_cast<double>(h.bin_counts[i]) / N;
        h.density[i] = p / w;
        h.ci_halfwidth[i] = kZ99 * std::sqrt(p * (1.0 - p) / N) / w;
    }
    return h;
}

std::string report_json(const ComparisonReport& r) {
    json j;
    j["t_lo"] = number(r.t_lo);
    j["t_hi"] = number(r.t_hi);
    j["fit_t_hi"] = number(r.fit_t_hi);
    j["mass_in_window"] = number(r.mass_in_window);
    j["l1"] = number(r.l1);
    j["l1_const"] = number(r.l1_const);
    j["tail_rate"] = number(r.tail_rate);
    j["tail_rate_se"] = number(r.tail_rate_se);
    j["tail_bins"] = r.tail_bins;
    j["reference_rate"] = number(r.reference_rate);
    j["tail_rate_rel_error"] = number(r.tail_rate_rel_error);
    j["censored_fraction"] = number(r.censored_fraction);
    double max_abs_z = 0.0;
    for (double z : r.z_scores) max_abs_z = std::max(max_abs_z, std::abs(z));
    j["max_abs_z"] = number(max_abs_z);
    j["z_centers"] = r.z_centers;
    j["z_scores"] = r.z_scores;
    return j.dump(2);
}

fs::path cmd_w1(const ExperimentConfig& cfg) {
    validate_config(cfg);
    const auto cov = make_covariance(cfg);
    const Boundary b = make_boundary(cfg);
    const PathGrid grid = make_grid(cfg);
    CsvTable table;
    table.metadata = metadata(cfg, "w1");
    table.columns = {"t", "w1"};
    for (std::size_t i = 0; i < grid.n_steps; ++i) {
        const double t = grid.time(i);
        table.rows.push_back({t, w1(*cov, b, t, cfg.x0)});
    }
    const fs::path path = fs::path(cfg.out_dir) / "w1.csv";
    write_csv(path, table);
    return path;
}

fs::path cmd_asymp(const ExperimentConfig& cfg) {
    validate_config(cfg);
    const auto cov = make_covariance(cfg);
    const Boundary b = make_boundary(cfg);
    const AsymptoticApproximation approx(*cov, b);
    const PathGrid grid = make_grid(cfg);
    CsvTable table;
    table.metadata = metadata(cfg, "asymp");
    table.columns = {"t", "R", "phi", "beta", "g_approx"};
    for (std::size_t i = 0; i < grid.n_steps; ++i) {
        const double t = grid.time(i);
        table.rows.push_back({t, approx.rate(t), approx.phi(t), approx.beta(t), approx.density(t)});
    }
    const fs::path path = fs::path(cfg.out_dir) / "asymp.csv";
    write_csv(path, table);

    json j;
    j["kind"] = approx.kind() == ApproxKind::constant ? "constant" : "periodic";
    j["S0"] = cfg.S0;
    j["R0"] = approx.R0();
    j["alpha"] = approx.alpha();
    j["Q"] = approx.period();
    j["t_max"] = grid.t_max();
    j["h_t_max"] = approx.cumulative_hazard(grid.t_max());
    write_text(fs::path(cfg.out_dir) / "asymp.json", j.dump(2) + "\n");
    return path;
}

fs::path cmd_simulate(const ExperimentConfig& cfg) {
    validate_config(cfg);
    const auto cov = make_covariance(cfg);
    const Boundary b = make_boundary(cfg);
    return write_ghat(cfg, simulate_or_synthesize(cfg, *cov, b, false));
}

ComparisonReport cmd_compare(const ExperimentConfig& cfg) {
    validate_config(cfg);
    const auto cov = make_covariance(cfg);
    const Boundary b = make_boundary(cfg);
    return write_compare(cfg, *cov, b, simulate_or_synthesize(cfg, *cov, b, true));
}

std::vector<ExperimentConfig> figure_configs(int id, const ExperimentConfig& base) {
    if (id < 1 || id > 7) throw ConfigError("figure id must be in 1..7, got " + std::to_string(id));
    struct Setup {
        std::string kind;
        double S0;
        double B;
    };
    std::vector<Setup> setups;
    std::vector<std::string> allowed{"w1", "asymp", "ghat", "compare"};
    switch (id) {
        case 1: setups = {{"constant", 2.0, 0.0}}; allowed = {"w1", "ghat"}; break;
        case 2: setups = {{"constant", 2.0, 0.0}, {"constant", 2.5, 0.0}}; break;
        case 3: setups = {{"sinusoidal", 2.0, 0.5}}; allowed = {"w1", "ghat"}; break;
        case 4: setups = {{"sinusoidal", 2.0, 0.1}}; break;
        case 5: setups = {{"sinusoidal", 2.0, 0.5}}; break;
        case 6: setups = {{"sinusoidal", 2.0, 1.0}}; break;
        default: setups = {{"sinusoidal", 2.5, 0.1}}; break;
    }
    std::vector<ExperimentConfig> out;
    const fs::path root = fs::path(base.out_dir) / ("fig" + std::to_string(id));
    for (const auto& s : setups) {
        ExperimentConfig cfg = base;
        cfg.a = 1.0;
        cfg.omega = 1.0;
        cfg.x0 = 0.0;
        cfg.boundary_kind = s.kind;
        cfg.S0 = s.S0;
        cfg.B = s.B;
        cfg.Q = 3.0;
        cfg.C = 0.0;
        const auto cov = make_covariance(cfg);
        const double rate = AsymptoticApproximation(*cov, make_boundary(cfg)).alpha();
        cfg.t_max = std::max(50.0, 50.0 * std::ceil(4.5 / rate / 50.0));
        cfg.compare_t_lo = cfg.bin_width * std::round(0.5 / rate / cfg.bin_width);
        cfg.compare_t_hi = std::min(cfg.t_max, cfg.bin_width * std::round(3.0 / rate / cfg.bin_width));
        cfg.curves.clear();
        for (const auto& c : base.curves)
            if (std::find(allowed.begin(), allowed.end(), c) != allowed.end()) cfg.curves.push_back(c);
        cfg.out_dir = (setups.size() > 1 ? root / figure_label(s.S0) : root).string();
        out.push_back(std::move(cfg));
    }
    return out;
}

void cmd_figures(int id, const ExperimentConfig& base, std::ostream& log) {
    for (const auto& cfg : figure_configs(id, base)) {
        validate_config(cfg);
        write_config_dump(cfg);
        const auto has = [&](const char* c) {
            return std::find(cfg.curves.begin(), cfg.curves.end(), c) != cfg.curves.end();
        };
        if (has("w1")) log << cmd_w1(cfg).string() << "\n";
        if (has("asymp")) log << cmd_asymp(cfg).string() << "\n";
        if (has("ghat") || has("compare")) {
            const auto cov = make_covariance(cfg);
            const Boundary b = make_boundary(cfg);
            const SimulationOutput sim = simulate_or_synthesize(cfg, *cov, b, true);
            if (has("ghat")) log << write_ghat(cfg, sim).string() << "\n";
            if (has("compare")) {
                write_compare(cfg, *cov, b, sim);
                log << (fs::path(cfg.out_dir) / "compare.csv").string() << "\n";
            }
        }
    }
}

std::vector<std::string> cmd_check(const ExperimentConfig& cfg) {
    validate_config(cfg);
    const auto cov = make_covariance(cfg);
    const Boundary b = make_boundary(cfg);
    std::vector<std::string> lines;
    json checks = json::array();
    const auto record = [&](const std::string& name, double probe, double value, double limit,
                            bool passed) {
        std::ostringstream os;
        os.precision(6);
        os << (passed ? "ok   " : "FAIL ") << name;
        if (probe != 0.0) os << " @ t=" << probe;
        os << ": " << value << " (limit " << limit << ")";
        lines.push_back(os.str());
        checks.push_back({{"name", name}, {"probe_t", number(probe)}, {"value", number(value)},
                          {"limit", number(limit)}, {"passed", passed}});
    };
    for (const auto& c : validate_assumptions(*cov, cfg.check_t_probe_max, cfg.check_tol).checks)
        record(c.name, c.probe_t, c.value, c.limit, c.passed);
    if (b.is_periodic())
        for (const auto& r : check_periodic_hypotheses(b, cfg.check_k_max, cfg.check_hypothesis_tol))
            record(r.name, 0.0, r.measured, r.limit, r.passed);
    for (const auto& r : check_growth_hypothesis(b, *cov, cfg.x0, cfg.check_ladder))
        record(r.name, 0.0, r.measured, r.limit, r.passed);
    write_text(fs::path(cfg.out_dir) / "check_report.json", checks.dump(2) + "\n");
    return lines;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"First-passage times of stationary Gaussian processes", "gaussfpt"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    struct Common {
        std::string config;
        std::string out_dir;
        std::uint64_t seed = 0;
        std::size_t paths = 0;
        std::map<std::string, std::string> overrides;
        int figure = 0;
    };
    std::map<std::string, Common> common;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"w1", "tabulate the upcrossing intensity W1 on the grid"},
        {"asymp", "tabulate R, phi, beta and the asymptotic density"},
        {"simulate", "Monte Carlo histogram of the first-passage time"},
        {"compare", "simulated density against the asymptotic approximation"},
        {"figures", "data bundle for figure 1..7"},
        {"check", "covariance assumptions and boundary hypotheses"}};
    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        Common& c = common[name];
        sub->add_option("--config", c.config, "key = value config file")->check(CLI::ExistingFile);
        sub->add_option("--out", c.out_dir, "output directory");
        sub->add_option("--seed", c.seed, "shortcut for --sim.seed");
        sub->add_option("--paths", c.paths, "shortcut for --sim.n_paths");
        for (const auto& key : config_keys())
            sub->add_option("--" + key.name, c.overrides[key.name], key.help);
        if (name == "figures")
            sub->add_option("--id,id", c.figure, "figure number")->required()->check(CLI::Range(1, 7));
        subs[name] = sub;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        for (const auto& [name, sub] : subs) {
            if (!sub->parsed()) continue;
            const Common& c = common[name];
            ExperimentConfig cfg;
            if (!c.config.empty()) load_config_file(cfg, c.config);
            for (const auto& key : config_keys())
                if (sub->count("--" + key.name) > 0)
                    set_config_value(cfg, key.name, c.overrides.at(key.name), "--" + key.name);
            if (sub->count("--out") > 0) cfg.out_dir = c.out_dir;
            if (sub->count("--seed") > 0) cfg.seed = c.seed;
            if (sub->count("--paths") > 0) cfg.n_paths = c.paths;
            validate_config(cfg);

            if (name == "w1") {
                out << cmd_w1(cfg).string() << "\n";
            } else if (name == "asymp") {
                out << cmd_asymp(cfg).string() << "\n";
            } else if (name == "simulate") {
                out << cmd_simulate(cfg).string() << "\n";
            } else if (name == "compare") {
                const ComparisonReport r = cmd_compare(cfg);
                out << "L1 " << r.l1 << "  L1(const) " << r.l1_const << "  mass " << r.mass_in_window
                    << "  tail rate " << r.tail_rate << " vs " << r.reference_rate
                    << " (rel error " << r.tail_rate_rel_error << ")\n";
            } else if (name == "figures") {
                cmd_figures(c.figure, cfg, out);
            } else {
                for (const auto& line : cmd_check(cfg)) out << line << "\n";
            }
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}

}  // namespace gaussfpt
