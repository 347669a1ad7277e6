#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "gaussfpt/boundary.hpp"
#include "gaussfpt/covariance.hpp"
#include "gaussfpt/simulate.hpp"

namespace gaussfpt {

/// Every tunable of one experiment. Field names mirror the dotted config keys.
struct ExperimentConfig {
    // covariance.*
    double a = 1.0;
    double omega = 1.0;
    // boundary.*: S(t) = S0 + C exp(-lambda t) + B sin(2 pi t / Q); C and lambda only for custom,
    // which is asymptotically constant when B = 0 and asymptotically periodic otherwise
    std::string boundary_kind = "constant";
    double S0 = 2.0;
    double B = 0.0;
    double Q = 3.0;
    double C = 0.0;
    double lambda = 1.0;
    double x0 = 0.0;
    // grid.*
    double dt = 0.01;
    double t_max = 50.0;
    // sim.*
    std::size_t n_paths = 100000;
    std::uint64_t seed = 1;
    std::size_t batch_size = 1000;
    double bin_width = 0.5;
    unsigned threads = 0;
    // rice.*
    std::vector<int> rice_orders{1};
    std::size_t rice_nodes = 32;
    std::size_t rice_max_nodes = 128;
    std::size_t simplex_nodes = 24;
    double rice_t_max = 5.0;  ///< partial sums in compare.csv only up to here
    // compare.*
    double compare_t_lo = 10.0;
    double compare_t_hi = 0.0;  ///< 0 means grid.t_max
    bool synthetic = false;     ///< replace the simulation by the exact approximation's bin masses
    // check.*
    double check_t_probe_max = 50.0;
    double check_tol = 1e-3;
    int check_k_max = 15;
    double check_hypothesis_tol = 1e-6;
    std::vector<double> check_ladder{2.0, 4.0, 8.0, 16.0};
    // outputs.*
    std::string out_dir = "out";
    std::vector<std::string> curves{"w1", "asymp", "ghat", "compare"};
};

/// One recognised dotted key with its description.
struct ConfigKey {
    std::string name;
    std::string help;
};

/// All keys accepted in config files and as --<key> flags.
const std::vector<ConfigKey>& config_keys();

/// Sets one key from its textual value. `where` prefixes error messages (file:line or flag).
/// Throws ConfigError naming the key for unknown keys and unparsable values.
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value,
                      const std::string& where);

/// Reads `key = value` lines; `#` starts a comment, blank lines are skipped.
void load_config_file(ExperimentConfig& cfg, const std::filesystem::path& path);

/// Throws ConfigError naming the first field that breaks a constraint.
void validate_config(const ExperimentConfig& cfg);

/// Key/value pairs in key order, values formatted to round-trip. Leaves out the keys that do not
/// affect results (sim.threads, outputs.directory).
std::vector<std::pair<std::string, std::string>> describe_config(const ExperimentConfig& cfg);

std::unique_ptr<CovarianceModel> make_covariance(const ExperimentConfig& cfg);
Boundary make_boundary(const ExperimentConfig& cfg);
PathGrid make_grid(const ExperimentConfig& cfg);
SimConfig make_sim(const ExperimentConfig& cfg);

/// Shortest round-tripping decimal text for a double.
std::string format_double(double v);

}  // namespace gaussfpt
