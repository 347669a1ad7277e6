#include "gaussfpt/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "gaussfpt/errors.hpp"

namespace gaussfpt {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

[[noreturn]] void bad_value(const std::string& where, const std::string& key,
                            const std::string& value, const std::string& expected) {
    throw ConfigError(where + ": " + key + ": cannot parse '" + value + "' as " + expected);
}

double parse_double(const std::string& where, const std::string& key, const std::string& text) {
    const std::string v = trim(text);
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
        bad_value(where, key, text, "a finite number");
    return out;
}

std::uint64_t parse_u64(const std::string& where, const std::string& key, const std::string& text) {
    const std::string v = trim(text);
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
        bad_value(where, key, text, "a non-negative integer");
    return out;
}

int parse_int(const std::string& where, const std::string& key, const std::string& text) {
    const std::string v = trim(text);
    int out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
        bad_value(where, key, text, "an integer");
    return out;
}

bool parse_bool(const std::string& where, const std::string& key, const std::string& text) {
    const std::string v = trim(text);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    bad_value(where, key, text, "a boolean");
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
    return out;
}

struct KeyHandler {
    ConfigKey key;
    std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
    bool affects_results = true;
};

template <class T>
KeyHandler number_key(std::string name, std::string help, T ExperimentConfig::*field) {
    KeyHandler h;
    h.key = {name, std::move(help)};
    h.set = [name, field](ExperimentConfig& c, const std::string& v, const std::string& where) {
        if constexpr (std::is_same_v<T, double>) {
            c.*field = parse_double(where, name, v);
        } else if constexpr (std::is_same_v<T, int>) {
            c.*field = parse_int(where, name, v);
        } else if constexpr (std::is_same_v<T, unsigned>) {
            const auto x = parse_u64(where, name, v);
            if (x > 4096) bad_value(where, name, v, "an integer in [0, 4096]");
            c.*field = static_cast<unsigned>(x);
        } else {
            c.*field = static_cast<T>(parse_u64(where, name, v));
        }
    };
    h.get = [field](const ExperimentConfig& c) {
        if constexpr (std::is_same_v<T, double>) {
            return format_double(c.*field);
        } else {
            return std::to_string(c.*field);
        }
    };
    return h;
}

const std::vector<KeyHandler>& handlers() {
    static const std::vector<KeyHandler> table = [] {
        std::vector<KeyHandler> t;
        t.push_back(number_key("covariance.a", "decay rate a > 0", &ExperimentConfig::a));
        t.push_back(number_key("covariance.omega", "angular frequency omega > 0",
                               &ExperimentConfig::omega));
        {
            KeyHandler h;
            h.key = {"boundary.kind", "constant | sinusoidal | custom"};
            h.set = [](ExperimentConfig& c, const std::string& v, const std::string&) {
                c.boundary_kind = trim(v);
            };
            h.get = [](const ExperimentConfig& c) { return c.boundary_kind; };
            t.push_back(h);
        }
        t.push_back(number_key("boundary.S0", "boundary level S0", &ExperimentConfig::S0));
        t.push_back(number_key("boundary.B", "sinusoid amplitude B", &ExperimentConfig::B));
        t.push_back(number_key("boundary.Q", "sinusoid period Q > 0", &ExperimentConfig::Q));
        t.push_back(number_key("boundary.C", "custom transient amplitude C", &ExperimentConfig::C));
        t.push_back(number_key("boundary.lambda", "custom transient decay rate > 0",
                               &ExperimentConfig::lambda));
        t.push_back(number_key("x0", "starting value X(0) < S(0)", &ExperimentConfig::x0));
        t.push_back(number_key("grid.dt", "time step", &ExperimentConfig::dt));
        t.push_back(number_key("grid.t_max", "time horizon", &ExperimentConfig::t_max));
        t.push_back(number_key("sim.n_paths", "number of simulated paths",
                               &ExperimentConfig::n_paths));
        t.push_back(number_key("sim.seed", "64-bit seed", &ExperimentConfig::seed));
        t.push_back(number_key("sim.batch_size", "paths per RNG substream",
                               &ExperimentConfig::batch_size));
        t.push_back(number_key("sim.bin_width", "histogram bin width", &ExperimentConfig::bin_width));
        {
            KeyHandler h = number_key("sim.threads", "worker threads, 0 = all cores",
                                      &ExperimentConfig::threads);
            h.affects_results = false;
            t.push_back(h);
        }
        {
            KeyHandler h;
            h.key = {"rice.orders", "comma list of partial-sum orders in {1,2,3}"};
            h.set = [](ExperimentConfig& c, const std::string& v, const std::string& where) {
                c.rice_orders.clear();
                for (const auto& item : split_list(v))
                    c.rice_orders.push_back(parse_int(where, "rice.orders", item));
            };
            h.get = [](const ExperimentConfig& c) {
                std::vector<std::string> items;
                for (int o : c.rice_orders) items.push_back(std::to_string(o));
                return join(items);
            };
            t.push_back(h);
        }
        t.push_back(number_key("rice.nodes", "Wn starting nodes per axis",
                               &ExperimentConfig::rice_nodes));
        t.push_back(number_key("rice.max_nodes", "Wn maximum nodes per axis",
                               &ExperimentConfig::rice_max_nodes));
        t.push_back(number_key("rice.simplex_nodes", "simplex nodes per axis",
                               &ExperimentConfig::simplex_nodes));
        t.push_back(number_key("rice.t_max", "largest time for partial sums in compare",
                               &ExperimentConfig::rice_t_max));
        t.push_back(number_key("compare.t_lo", "start of the comparison window",
                               &ExperimentConfig::compare_t_lo));
        t.push_back(number_key("compare.t_hi", "end of the comparison window, 0 = grid.t_max",
                               &ExperimentConfig::compare_t_hi));
        {
            KeyHandler h;
            h.key = {"compare.synthetic", "use the approximation's exact bin masses as data"};
            h.set = [](ExperimentConfig& c, const std::string& v, const std::string& where) {
                c.synthetic = parse_bool(where, "compare.synthetic", v);
            };
            h.get = [](const ExperimentConfig& c) { return std::string(c.synthetic ? "true" : "false"); };
            t.push_back(h);
        }
        t.push_back(number_key("check.t_probe_max", "largest decay probe time",
                               &ExperimentConfig::check_t_probe_max));
        t.push_back(number_key("check.tol", "decay tolerance", &ExperimentConfig::check_tol));
        t.push_back(number_key("check.k_max", "periods to shift for the periodic-limit check",
                               &ExperimentConfig::check_k_max));
        t.push_back(number_key("check.hypothesis_tol", "periodic-limit tolerance",
                               &ExperimentConfig::check_hypothesis_tol));
        {
            KeyHandler h;
            h.key = {"check.ladder", "comma list of increasing S0 values"};
            h.set = [](ExperimentConfig& c, const std::string& v, const std::string& where) {
                c.check_ladder.clear();
                for (const auto& item : split_list(v))
                    c.check_ladder.push_back(parse_double(where, "check.ladder", item));
            };
            h.get = [](const ExperimentConfig& c) {
                std::vector<std::string> items;
                for (double s : c.check_ladder) items.push_back(format_double(s));
                return join(items);
            };
            t.push_back(h);
        }
        {
            KeyHandler h;
            h.key = {"outputs.directory", "output directory"};
            h.set = [](ExperimentConfig& c, const std::string& v, const std::string&) {
                c.out_dir = trim(v);
            };
            h.get = [](const ExperimentConfig& c) { return c.out_dir; };
            h.affects_results = false;
            t.push_back(h);
        }
        {
            KeyHandler h;
            h.key = {"outputs.curves", "files written by figures: w1, asymp, ghat, compare"};
            h.set = [](ExperimentConfig& c, const std::string& v, const std::string&) {
                c.curves = split_list(v);
            };
            h.get = [](const ExperimentConfig& c) { return join(c.curves); };
            t.push_back(h);
        }
        return t;
    }();
    return table;
}

[[noreturn]] void invalid(const std::string& key, const std::string& message) {
    throw ConfigError(key + ": " + message);
}

void require_positive(const std::string& key, double v) {
    if (!(v > 0.0)) invalid(key, "must be positive, got " + format_double(v));
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = [] {
        std::vector<ConfigKey> k;
        for (const auto& h : handlers()) k.push_back(h.key);
        return k;
    }();
    return keys;
}

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value,
                      const std::string& where) {
    for (const auto& h : handlers()) {
        if (h.key.name == key) {
            h.set(cfg, value, where);
            return;
        }
    }
    throw ConfigError(where + ": unknown key '" + key + "'");
}

void load_config_file(ExperimentConfig& cfg, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string() + ": cannot open config file");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(lineno);
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
        set_config_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), where);
    }
}

void validate_config(const ExperimentConfig& cfg) {
    require_positive("covariance.a", cfg.a);
    require_positive("covariance.omega", cfg.omega);
    const auto& kind = cfg.boundary_kind;
    if (kind != "constant" && kind != "sinusoidal" && kind != "custom")
        invalid("boundary.kind", "must be constant, sinusoidal or custom, got '" + kind + "'");
    if (kind != "constant") require_positive("boundary.Q", cfg.Q);
    if (kind == "custom") require_positive("boundary.lambda", cfg.lambda);
    const double S_start = cfg.S0 + (kind == "custom" ? cfg.C : 0.0);
    if (!(cfg.x0 < S_start))
        invalid("x0", "must lie below S(0) = " + format_double(S_start) + ", got " +
                          format_double(cfg.x0));
    require_positive("grid.dt", cfg.dt);
    require_positive("grid.t_max", cfg.t_max);
    if (!(cfg.t_max >= cfg.dt)) invalid("grid.t_max", "must be at least grid.dt");
    const double guard = 0.1 * 2.0 * std::numbers::pi / std::max(cfg.a, cfg.omega);
    if (cfg.dt > guard)
        invalid("grid.dt", "must be at most 0.1 * 2 pi / max(a, omega) = " + format_double(guard));
    if (cfg.n_paths < 1) invalid("sim.n_paths", "must be at least 1");
    if (cfg.batch_size < 1) invalid("sim.batch_size", "must be at least 1");
    require_positive("sim.bin_width", cfg.bin_width);
    if (cfg.rice_orders.empty()) invalid("rice.orders", "must list at least one order");
    for (int o : cfg.rice_orders)
        if (o < 1 || o > 3) invalid("rice.orders", "orders must be 1, 2 or 3");
    if (cfg.rice_nodes < 1) invalid("rice.nodes", "must be at least 1");
    if (cfg.rice_max_nodes < 2 * cfg.rice_nodes)
        invalid("rice.max_nodes", "must be at least twice rice.nodes");
    if (cfg.simplex_nodes < 1) invalid("rice.simplex_nodes", "must be at least 1");
    if (!(cfg.rice_t_max >= 0.0)) invalid("rice.t_max", "must be non-negative");
    if (!(cfg.compare_t_lo >= 0.0)) invalid("compare.t_lo", "must be non-negative");
    if (cfg.compare_t_hi != 0.0 && !(cfg.compare_t_hi > cfg.compare_t_lo))
        invalid("compare.t_hi", "must be 0 or exceed compare.t_lo");
    require_positive("check.t_probe_max", cfg.check_t_probe_max);
    require_positive("check.tol", cfg.check_tol);
    if (cfg.check_k_max < 1) invalid("check.k_max", "must be at least 1");
    require_positive("check.hypothesis_tol", cfg.check_hypothesis_tol);
    if (cfg.check_ladder.empty()) invalid("check.ladder", "must not be empty");
    for (std::size_t i = 1; i < cfg.check_ladder.size(); ++i)
        if (!(cfg.check_ladder[i] > cfg.check_ladder[i - 1]))
            invalid("check.ladder", "must be increasing");
    for (const auto& c : cfg.curves)
        if (c != "w1" && c != "asymp" && c != "ghat" && c != "compare")
            invalid("outputs.curves", "unknown curve '" + c + "'");
    if (cfg.out_dir.empty()) invalid("outputs.directory", "must not be empty");
}

std::vector<std::pair<std::string, std::string>> describe_config(const ExperimentConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& h : handlers())
        if (h.affects_results) out.emplace_back(h.key.name, h.get(cfg));
    return out;
}

std::unique_ptr<CovarianceModel> make_covariance(const ExperimentConfig& cfg) {
    return std::make_unique<DampedOscillatoryCovariance>(cfg.a, cfg.omega);
}

Boundary make_boundary(const ExperimentConfig& cfg) {
    if (cfg.boundary_kind == "constant") return constant_boundary(cfg.S0);
    if (cfg.boundary_kind == "sinusoidal") return sinusoidal_boundary(cfg.S0, cfg.B, cfg.Q);
    if (cfg.boundary_kind == "custom") {
        const double B = cfg.B, Q = cfg.Q, C = cfg.C, lam = cfg.lambda;
        const double k = 2.0 * std::numbers::pi / Q;
        PeriodicLimit limit{[B, k](double t) { return B * std::sin(k * t); },
                            [B, k](double t) { return B * k * std::cos(k * t); }, Q};
        std::ostringstream label;
        label.precision(17);
        label << "custom(C=" << C << ", lambda=" << lam << ", B=" << B << ", Q=" << Q << ")";
        if (B == 0.0)
            return asymptotically_constant_boundary(
                cfg.S0, [=](double t) { return C * std::exp(-lam * t); },
                [=](double t) { return -lam * C * std::exp(-lam * t); }, label.str());
        return asymptotically_periodic_boundary(
            cfg.S0, [=](double t) { return C * std::exp(-lam * t) + B * std::sin(k * t); },
            [=](double t) { return -lam * C * std::exp(-lam * t) + B * k * std::cos(k * t); },
            limit, label.str());
    }
    invalid("boundary.kind", "must be constant, sinusoidal or custom, got '" + cfg.boundary_kind + "'");
}

PathGrid make_grid(const ExperimentConfig& cfg) { return PathGrid::covering(cfg.dt, cfg.t_max); }

SimConfig make_sim(const ExperimentConfig& cfg) {
    SimConfig sim;
    sim.n_paths = cfg.n_paths;
    sim.seed = cfg.seed;
    sim.batch_size = cfg.batch_size;
    sim.x0 = cfg.x0;
    sim.threads = cfg.threads;
    return sim;
}

}  // namespace gaussfpt
