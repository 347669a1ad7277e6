#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

#include "gaussfpt/boundary.hpp"
#include "gaussfpt/covariance.hpp"

namespace gaussfpt {

/// Covariance matrix of (X(0), X(t_1..t_n), X'(t_1..t_n)), size 2n+1.
///
/// Blocks: gamma(t_i - t_j) between values, gamma'(t_j - t_i) for X(t_i) X'(t_j) and
/// -gamma''(t_i - t_j) between derivatives. The implicit time t_0 = 0 sits in row 0.
struct LambdaMatrix {
    std::vector<double> times;  ///< t_1 < ... < t_n
    Eigen::MatrixXd entries;
    Eigen::MatrixXd inverse;
    double determinant = 0.0;

    std::size_t n() const { return times.size(); }
    /// Cofactor matrix, det * inverse^T (the adjugate transposed).
    Eigen::MatrixXd cofactors() const { return determinant * inverse.transpose(); }
};

/// Throws DegenerateTimes if the times are not strictly increasing and positive with gaps of
/// at least 1e-12, or if the matrix is not numerically positive definite.
LambdaMatrix build_lambda(const CovarianceModel& cov, std::span<const double> times);

/// |Lambda_3(t)| = -gamma''(0) [1 - gamma(t)^2] - gamma'(t)^2.
double lambda3_det(const CovarianceModel& cov, double t);

/// Standardized slope excess sigma(t|x0) entering W1; requires t > 0.
double sigma(const CovarianceModel& cov, const Boundary& b, double t, double x0);

/// Upcrossing intensity W1(t|x0) in closed form; W1(0) = 0.
double w1(const CovarianceModel& cov, const Boundary& b, double t, double x0);

/// Tensor Gauss-Legendre settings for the slope integrals inside Wn.
struct QuadratureConfig {
    std::size_t nodes = 32;      ///< starting nodes per axis
    std::size_t max_nodes = 128; ///< doubling stops here
    double rel_tol = 1e-6;
    double abs_tol = 0.0;        ///< on Wn itself; accepts estimates that are negligibly small
};

struct WnResult {
    double value = 0.0;
    double error = 0.0;         ///< |I(2N) - I(N)| at the last doubling
    std::size_t nodes = 0;      ///< nodes per axis of the returned estimate
};

/// Joint upcrossing density Wn(t_1, ..., t_n | x0) for n in {1, 2, 3}.
///
/// The slope excesses u_i = xi_i - psi'(t_i) >= 0 are mapped to v in [0, 1) by
/// u = s v / (1 - v) and integrated with a tensor Gauss-Legendre rule whose node count
/// doubles until two successive estimates agree to max(rel_tol |Wn|, abs_tol). The per-axis scale s is the
/// conditional standard deviation of X'(t_i) plus any positive shift of its conditional mean.
/// Throws QuadratureNotConverged or DegenerateTimes.
WnResult wn(const CovarianceModel& cov, const Boundary& b, std::span<const double> times,
            double x0, const QuadratureConfig& quad = {});

/// Gauss-Legendre rule on the crossing-time simplex used by partial_sum.
struct SimplexQuadConfig {
    std::size_t nodes = 24;     ///< per simplex axis
    double exclusion = 1e-3;    ///< crossing times closer than exclusion * t are cut out
    bool estimate_error = true; ///< also evaluate with 2 * nodes and report the difference
    QuadratureConfig inner{};   ///< abs_tol is raised to inner_abs_factor * a_1 if smaller
    double inner_abs_factor = 1e-10;
};

/// Partial sums a_1..a_r of the alternating upcrossing series for g(t|x0).
struct RiceEvaluation {
    int order = 0;
    double t = 0.0;
    double w1 = 0.0;
    std::vector<double> partial_sums;    ///< a_1, ..., a_r
    std::vector<double> error_estimates; ///< absolute, one per partial sum
};

/// a_1 = W1(t), a_2 = a_1 - int_0^t W2(t1, t) dt1, a_3 = a_2 + double integral of W3(t1, t2, t).
/// Requires order in {1, 2, 3} and t > 0. Even partial sums bound g from below, odd from above.
RiceEvaluation partial_sum(const CovarianceModel& cov, const Boundary& b, double x0, double t,
                           int order, const SimplexQuadConfig& grid = {});

enum class LimitMode { constant, periodic };

struct LimitDiagnosticRow {
    double S0 = 0.0;
    std::vector<double> scaled_times;  ///< theta_i
    double det = 0.0;                  ///< |Lambda_{2n+1}(theta)|
    double det_limit = 0.0;            ///< (-gamma''(0))^n
    double max_offdiag = 0.0;          ///< largest |off-diagonal| entry of Lambda
    double k_scaled = 0.0;             ///< scaled K at xi = 0
    double k_limit = 0.0;              ///< its limiting value
    double wn_ratio = 0.0;             ///< Wn(theta) / prod R
    double wn_ratio_error = 0.0;       ///< quadrature error carried into wn_ratio
    double uv_ratio = 0.0;             ///< prod_i U(theta_i|x0) / V(theta_i)
};

/// Tabulates the large-level behaviour of the Wn building blocks along an S0 ladder.
/// Constant mode scales theta_i = tau_i / R(S0); periodic mode uses theta_i = phi(tau_i / alpha).
/// `b` supplies the perturbation; its S0 is replaced by each ladder value.
std::vector<LimitDiagnosticRow> limit_diagnostics(const CovarianceModel& cov, const Boundary& b,
                                                  double x0, std::span<const double> tau,
                                                  std::span<const double> S0_ladder,
                                                  LimitMode mode,
                                                  const QuadratureConfig& quad = {});

}  // namespace gaussfpt
