#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "gaussfpt/asymptotics.hpp"
#include "gaussfpt/config.hpp"
#include "gaussfpt/simulate.hpp"

namespace gaussfpt {

inline constexpr const char* kVersion = "1.0.0";

/// Simulated density against the asymptotic approximation over [t_lo, t_hi].
struct ComparisonReport {
    double t_lo = 0.0;
    double t_hi = 0.0;
    double fit_t_hi = 0.0;      ///< t_hi cut to whole periods for periodic approximations
    double mass_in_window = 0.0;
    double l1 = 0.0;            ///< sum |ghat - bin average of g_approx| * width
    double l1_const = 0.0;      ///< same against R(S0) e^{-R(S0) t}
    double tail_rate = 0.0;
    double tail_rate_se = 0.0;
    std::size_t tail_bins = 0;
    double reference_rate = 0.0;  ///< alpha, or R(S0) for the constant kind
    double tail_rate_rel_error = 0.0;
    std::vector<double> z_centers;
    std::vector<double> z_scores;  ///< (ghat - mean) / sd with sd from the approximation's mass
    double censored_fraction = 0.0;
};

/// Bin averages (S(a) - S(b)) / (b - a) of the approximation's density on the histogram bins.
std::vector<double> bin_averaged_approx(const AsymptoticApproximation& approx,
                                        const FptHistogram& h);

/// The tail rate is fitted on the histogram bins for the constant kind and on whole-period
/// aggregates starting at t_lo for the periodic kind. Throws InsufficientData when the fit has
/// fewer than 10 usable bins (periods).
ComparisonReport compare_histogram(const FptHistogram& h, const AsymptoticApproximation& approx,
                                   double S0_rate, double t_lo, double t_hi);

/// Histogram whose counts are the approximation's expected counts n_paths * bin mass, rounded.
FptHistogram synthetic_histogram(const AsymptoticApproximation& approx, const PathGrid& grid,
                                 std::size_t n_paths, double bin_width);

std::string report_json(const ComparisonReport& report);

/// Subcommand bodies. Each validates cfg and writes into cfg.out_dir.
std::filesystem::path cmd_w1(const ExperimentConfig& cfg);
std::filesystem::path cmd_asymp(const ExperimentConfig& cfg);
std::filesystem::path cmd_simulate(const ExperimentConfig& cfg);
ComparisonReport cmd_compare(const ExperimentConfig& cfg);
/// Parameterization of figure `id` (1..7) on top of base's numerical settings.
std::vector<ExperimentConfig> figure_configs(int id, const ExperimentConfig& base);
void cmd_figures(int id, const ExperimentConfig& base, std::ostream& log);
/// Assumption and hypothesis checks; returns the report lines written to check_report.json.
std::vector<std::string> cmd_check(const ExperimentConfig& cfg);

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitNumerical = 2;
inline constexpr int kExitInsufficient = 3;

/// Parses the command line and runs one subcommand.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gaussfpt
