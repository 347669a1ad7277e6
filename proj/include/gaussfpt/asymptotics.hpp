#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gaussfpt/boundary.hpp"
#include "gaussfpt/covariance.hpp"
#include "gaussfpt/simulate.hpp"

namespace gaussfpt {

/// R(S0) = sqrt(-gamma''(0)) / (2 pi) exp(-S0^2 / 2).
double r_const(const CovarianceModel& cov, double S0);

/// R[Z(t)] = sqrt(c) / (2 pi) exp(-(S0 + Z(t))^2 / 2) A(Z'(t) / sqrt(2 c)), c = -gamma''(0).
/// Throws ConfigError if b has no periodic limit.
double r_periodic(const CovarianceModel& cov, const Boundary& b, double t);

/// R e^{-R t} with R = r_const(cov, S0).
double g_approx_const(const CovarianceModel& cov, double S0, double t);

enum class ApproxKind { constant, periodic };

/// Exponential (constant limit) or non-homogeneous exponential (periodic limit) approximation
/// of the first-passage density, with hazard rate(t) and cumulative hazard h(t).
///
/// A periodic boundary whose R[Z] equals R(S0) at every table node (Z identically 0) is
/// treated as constant, so both kinds give bit-identical results there.
/// The periodic table holds h at 512 equal panels of [0, Q]; h(t + kQ) = h(t) + k alpha Q.
class AsymptoticApproximation {
public:
    static constexpr std::size_t kPanels = 512;

    AsymptoticApproximation(const CovarianceModel& cov, const Boundary& b);

    ApproxKind kind() const { return kind_; }
    double R0() const { return R0_; }
    /// Period-average of the hazard; equals R0 for the constant kind.
    double alpha() const { return alpha_; }
    /// Q, or 0 for the constant kind.
    double period() const { return Q_; }

    double rate(double t) const;
    double cumulative_hazard(double t) const;
    /// Solves h(phi) = alpha t; phi(t + kQ) = phi(t) + kQ.
    double phi(double t) const;
    double dphi(double t) const { return alpha_ / rate(phi(t)); }
    /// beta(t) = rate(t) exp(alpha t - h(t)), evaluated on t mod Q.
    double beta(double t) const;
    /// rate(t) exp(-h(t)).
    double density(double t) const;
    double survival(double t) const;

private:
    double reduce(double t, double& whole_periods) const;
    double table_hazard(double t) const;  ///< h on [0, Q]
    double periodic_rate(double t) const;

    ApproxKind kind_ = ApproxKind::constant;
    Boundary boundary_;
    double c_;
    double R0_;
    double alpha_;
    double Q_ = 0.0;
    std::vector<double> cumulative_;  ///< h(k Q / kPanels), k = 0 .. kPanels
};

/// Period average of R[Z] from the cumulative table; r_const(S0) when Z is identically 0.
double alpha(const CovarianceModel& cov, const Boundary& b);

/// Growth condition on rho along an S0 ladder at a fixed scaled time t: |rho(t / R)| / S0 for
/// non-periodic boundaries, |rho(phi(t / alpha))| / (S0 + Z(phi(t / alpha))) for periodic ones.
/// One report per ladder value, then "monotone" and "below_tol" summaries.
/// Throws ConfigError if x0 >= S(0) at the smallest S0 or the ladder is not increasing;
/// HypothesisViolation if the ratio at the largest S0 is not below tol.
std::vector<HypothesisReport> check_growth_hypothesis(const Boundary& b, const CovarianceModel& cov,
                                                      double x0,
                                                      std::span<const double> S0_ladder,
                                                      double t = 1.0, double tol = 0.1);

/// sup over tau_grid of |g(phi(tau / alpha)) phi'(tau / alpha) / alpha - e^{-tau}| for a density
/// g given pointwise. Zero (to rounding) for g = approx.density.
double scaled_density_distance(const AsymptoticApproximation& approx, const ScalarFn& g,
                               std::span<const double> tau_grid);

struct ScaledLimitRow {
    double S0 = 0.0;
    double sup_distance = 0.0;
    double noise_level = 0.0;        ///< largest 99% half-width among the bins
    double censored_fraction = 0.0;
    std::size_t n_paths = 0;
    std::vector<double> bin_density;  ///< on the scaled axis
    std::vector<double> exact;        ///< bin averages of e^{-tau}
};

/// Maps simulated first-passage times T onto the exponential clock tau = h(T), whose law tends
/// to Exp(1) as S0 grows. The same transform is the density rescaling
/// g(phi(tau / alpha)) phi'(tau / alpha) / alpha. Bins the mapped sample on tau_edges and reports
/// the sup distance between bin densities and bin averages of e^{-tau}.
/// Throws InsufficientPaths if the horizon h(t_max) falls short of the last edge or more than 10%
/// of paths are censored.
ScaledLimitRow scaled_sample_distance(const AsymptoticApproximation& approx,
                                      const FptSample& sample, std::span<const double> tau_edges);

struct ScaledLimitSettings {
    double dt = 0.02;
    std::size_t n_paths = 20000;
    std::uint64_t seed = 1;
    std::size_t batch_size = 500;
    unsigned threads = 0;
    double horizon_margin = 1.05;  ///< simulate to h(t_max) >= margin * last edge
};

struct ScaledLimitReport {
    std::vector<ScaledLimitRow> rows;
    bool non_increasing = false;
};

/// Runs the simulator at every S0 in the ladder (perturbation of b kept fixed) and tabulates
/// scaled_sample_distance. Only the limit is known, with no rate, so the report states whether
/// the distances are non-increasing along the ladder.
ScaledLimitReport scaled_fpt_limit_check(const CovarianceModel& cov, const Boundary& b, double x0,
                                         std::span<const double> S0_ladder,
                                         std::span<const double> tau_edges,
                                         const ScaledLimitSettings& settings = {});

}  // namespace gaussfpt
