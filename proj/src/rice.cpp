#include "gaussfpt/rice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "gaussfpt/asymptotics.hpp"
#include "gaussfpt/errors.hpp"
#include "gaussfpt/quadrature.hpp"
#include "gaussfpt/special.hpp"

namespace gaussfpt {

namespace {

constexpr double kMinTimeGap = 1e-12;

void require_order(std::size_t n) {
    if (n < 1 || n > 3) throw ConfigError("Wn is implemented for n in {1, 2, 3}");
}

// Slope integral of Wn after the X-part has been factored out:
//   int_{u >= 0} prod u_i exp(-1/2 d^T P d) du,   d = dpsi + u - m.
class SlopeIntegrand {
public:
    SlopeIntegrand(Eigen::MatrixXd precision, Eigen::VectorXd shift, Eigen::VectorXd scale)
        : precision_(std::move(precision)), shift_(std::move(shift)), scale_(std::move(scale)) {}

    double integrate(std::size_t nodes) const {
        const auto& rule = gauss_legendre(nodes);
        const std::size_t n = static_cast<std::size_t>(shift_.size());
        // per-axis offsets d_ik and weights u_ik * du/dv * w_k
        std::vector<std::vector<double>> d(n, std::vector<double>(nodes));
        std::vector<std::vector<double>> w(n, std::vector<double>(nodes));
        for (std::size_t i = 0; i < n; ++i) {
            const double s = scale_(static_cast<Eigen::Index>(i));
            for (std::size_t k = 0; k < nodes; ++k) {
                const double v = 0.5 * (rule.nodes[k] + 1.0);
                const double one_minus = 1.0 - v;
                const double u = s * v / one_minus;
                d[i][k] = shift_(static_cast<Eigen::Index>(i)) + u;
                w[i][k] = 0.5 * rule.weights[k] * u * s / (one_minus * one_minus);
            }
        }
        const auto& P = precision_;
        double sum = 0.0;
        if (n == 1) {
            for (std::size_t k = 0; k < nodes; ++k)
                sum += w[0][k] * std::exp(-0.5 * P(0, 0) * d[0][k] * d[0][k]);
        } else if (n == 2) {
            for (std::size_t k = 0; k < nodes; ++k) {
                const double a = d[0][k];
                const double qa = P(0, 0) * a * a;
                const double la = 2.0 * P(0, 1) * a;
                double inner = 0.0;
                for (std::size_t l = 0; l < nodes; ++l) {
                    const double bv = d[1][l];
                    inner += w[1][l] * std::exp(-0.5 * (qa + la * bv + P(1, 1) * bv * bv));
                }
                sum += w[0][k] * inner;
            }
        } else {
            for (std::size_t k = 0; k < nodes; ++k) {
                const double a = d[0][k];
                for (std::size_t l = 0; l < nodes; ++l) {
                    const double bv = d[1][l];
                    const double q2 = P(0, 0) * a * a + 2.0 * P(0, 1) * a * bv + P(1, 1) * bv * bv;
                    const double l2 = 2.0 * (P(0, 2) * a + P(1, 2) * bv);
                    double inner = 0.0;
                    for (std::size_t m = 0; m < nodes; ++m) {
                        const double c = d[2][m];
                        inner += w[2][m] * std::exp(-0.5 * (q2 + l2 * c + P(2, 2) * c * c));
                    }
                    sum += w[0][k] * w[1][l] * inner;
                }
            }
        }
        return sum;
    }

private:
    Eigen::MatrixXd precision_;
    Eigen::VectorXd shift_;
    Eigen::VectorXd scale_;
};

}  // namespace

LambdaMatrix build_lambda(const CovarianceModel& cov, std::span<const double> times) {
    const std::size_t n = times.size();
    if (n == 0) throw ConfigError("build_lambda needs at least one crossing time");
    double prev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(times[i] - prev >= kMinTimeGap)) {
            std::ostringstream os;
            os.precision(17);
            os << "crossing times must be positive and strictly increasing by at least "
               << kMinTimeGap << "; got t[" << i << "]=" << times[i] << " after " << prev;
            throw DegenerateTimes(os.str());
        }
        prev = times[i];
    }

    const auto dim = static_cast<Eigen::Index>(2 * n + 1);
    const auto nn = static_cast<Eigen::Index>(n);
    std::vector<double> s(n + 1, 0.0);
    std::copy(times.begin(), times.end(), s.begin() + 1);

    LambdaMatrix lam;
    lam.times.assign(times.begin(), times.end());
    lam.entries.resize(dim, dim);
    auto& L = lam.entries;
    for (Eigen::Index i = 0; i <= nn; ++i)
        for (Eigen::Index j = 0; j <= nn; ++j) L(i, j) = cov.gamma(s[i] - s[j]);
    for (Eigen::Index i = 0; i <= nn; ++i) {
        for (Eigen::Index j = 1; j <= nn; ++j) {
            // E[X(s_i) X'(t_j)] = gamma'(t_j - s_i)
            const double v = cov.dgamma(s[j] - s[i]);
            L(i, nn + j) = v;
            L(nn + j, i) = v;
        }
    }
    for (Eigen::Index i = 1; i <= nn; ++i)
        for (Eigen::Index j = 1; j <= nn; ++j)
            L(nn + i, nn + j) = i == j ? -cov.ddgamma0() : -cov.ddgamma(s[i] - s[j]);

    Eigen::LLT<Eigen::MatrixXd> llt(L);
    if (llt.info() != Eigen::Success)
        throw DegenerateTimes("covariance matrix of the crossing times is not positive definite");
    const Eigen::MatrixXd factor = llt.matrixL();
    double det = 1.0;
    for (Eigen::Index i = 0; i < dim; ++i) det *= factor(i, i) * factor(i, i);
    if (!(det > 0.0))
        throw DegenerateTimes("covariance matrix of the crossing times is numerically singular");
    lam.determinant = det;
    lam.inverse = llt.solve(Eigen::MatrixXd::Identity(dim, dim));
    return lam;
}

double lambda3_det(const CovarianceModel& cov, double t) {
    const double g = cov.gamma(t);
    const double dg = cov.dgamma(t);
    return -cov.ddgamma0() * (1.0 - g) * (1.0 + g) - dg * dg;
}

double sigma(const CovarianceModel& cov, const Boundary& b, double t, double x0) {
    if (!(t > 0.0)) throw ConfigError("sigma(t|x0) is defined for t > 0 only");
    const double g = cov.gamma(t);
    const double dg = cov.dgamma(t);
    const double one_minus = (1.0 - g) * (1.0 + g);
    const double det = lambda3_det(cov, t);
    return std::sqrt(one_minus / det) * (b.dS(t) + dg * (g * b.S(t) - x0) / one_minus);
}

double w1(const CovarianceModel& cov, const Boundary& b, double t, double x0) {
    if (!(t > 0.0)) return 0.0;
    const double g = cov.gamma(t);
    const double dg = cov.dgamma(t);
    const double one_minus = (1.0 - g) * (1.0 + g);
    const double det = -cov.ddgamma0() * one_minus - dg * dg;
    if (!(one_minus > 0.0) || !(det > 0.0)) return 0.0;
    const double S = b.S(t);
    const double psi = S - x0 * g;
    const double sig = std::sqrt(one_minus / det) * (b.dS(t) + dg * (g * S - x0) / one_minus);
    return std::sqrt(det) / (2.0 * std::numbers::pi * one_minus) *
           std::exp(-psi * psi / (2.0 * one_minus)) * a_function(sig / std::numbers::sqrt2);
}

WnResult wn(const CovarianceModel& cov, const Boundary& b, std::span<const double> times,
            double x0, const QuadratureConfig& quad) {
    const std::size_t n = times.size();
    require_order(n);
    if (quad.nodes == 0 || quad.max_nodes < quad.nodes)
        throw ConfigError("quadrature node counts must satisfy 0 < nodes <= max_nodes");
    const LambdaMatrix lam = build_lambda(cov, times);
    const auto nn = static_cast<Eigen::Index>(n);

    Eigen::VectorXd psi(nn);
    Eigen::VectorXd dpsi(nn);
    for (Eigen::Index i = 0; i < nn; ++i) {
        const double t = times[static_cast<std::size_t>(i)];
        psi(i) = b.S(t) - x0 * cov.gamma(t);
        dpsi(i) = b.dS(t) - x0 * cov.dgamma(t);
    }
    const Eigen::MatrixXd& P = lam.inverse;
    const Eigen::MatrixXd Pxx = P.block(1, 1, nn, nn);
    const Eigen::MatrixXd Pxy = P.block(1, 1 + nn, nn, nn);
    const Eigen::MatrixXd Pyy = P.block(1 + nn, 1 + nn, nn, nn);

    // Slopes given the values are Gaussian with precision Pyy and mean m = -Pyy^{-1} Pxy^T psi.
    const Eigen::VectorXd lin = Pxy.transpose() * psi;
    const Eigen::MatrixXd slope_cov = Pyy.inverse();
    const Eigen::VectorXd mean = -slope_cov * lin;
    const double value_exponent = -0.5 * (psi.dot(Pxx * psi) + lin.dot(mean));

    Eigen::VectorXd scale(nn);
    for (Eigen::Index i = 0; i < nn; ++i)
        scale(i) = std::sqrt(slope_cov(i, i)) + std::max(0.0, mean(i) - dpsi(i));

    const SlopeIntegrand integrand(Pyy, dpsi - mean, scale);
    const double prefactor = std::exp(value_exponent) /
                             (std::pow(2.0 * std::numbers::pi, static_cast<double>(n)) *
                              std::sqrt(lam.determinant));

    std::size_t nodes = quad.nodes;
    double coarse = integrand.integrate(nodes);
    while (true) {
        const std::size_t finer_nodes = 2 * nodes;
        if (finer_nodes > quad.max_nodes) {
            std::ostringstream os;
            os << "Wn quadrature did not reach rel_tol " << quad.rel_tol << " with "
               << quad.max_nodes << " nodes per axis (n=" << n << ")";
            throw QuadratureNotConverged(os.str());
        }
        const double fine = integrand.integrate(finer_nodes);
        const double diff = std::abs(fine - coarse);
        if (diff <= quad.rel_tol * std::abs(fine) || prefactor * diff <= quad.abs_tol) {
            return {prefactor * fine, prefactor * diff, finer_nodes};
        }
        nodes = finer_nodes;
        coarse = fine;
    }
}

namespace {

struct SimplexIntegral {
    double value;
    double error;
};

double w2_at(const CovarianceModel& cov, const Boundary& b, double x0, double t1, double t,
             const QuadratureConfig& quad) {
    const double times[2] = {t1, t};
    return wn(cov, b, times, x0, quad).value;
}

double w3_at(const CovarianceModel& cov, const Boundary& b, double x0, double t1, double t2,
             double t, const QuadratureConfig& quad) {
    const double times[3] = {t1, t2, t};
    return wn(cov, b, times, x0, quad).value;
}

// int_delta^{t - delta} W2(t1, t) dt1
double second_order_term(const CovarianceModel& cov, const Boundary& b, double x0, double t,
                         double delta, std::size_t nodes, const QuadratureConfig& quad) {
    return integrate_gl([&](double t1) { return w2_at(cov, b, x0, t1, t, quad); }, delta,
                        t - delta, nodes);
}

// over delta < t1 < t2 - delta, 2 delta < t2 < t - delta
double third_order_term(const CovarianceModel& cov, const Boundary& b, double x0, double t,
                        double delta, std::size_t nodes, const QuadratureConfig& quad) {
    const auto& rule = gauss_legendre(nodes);
    const double outer_len = t - 3.0 * delta;
    double sum = 0.0;
    for (std::size_t j = 0; j < nodes; ++j) {
        const double v = 0.5 * (rule.nodes[j] + 1.0);
        const double t2 = 2.0 * delta + outer_len * v;
        const double inner_len = t2 - 2.0 * delta;
        double inner = 0.0;
        for (std::size_t i = 0; i < nodes; ++i) {
            const double u = 0.5 * (rule.nodes[i] + 1.0);
            const double t1 = delta + inner_len * u;
            inner += 0.5 * rule.weights[i] * w3_at(cov, b, x0, t1, t2, t, quad);
        }
        sum += 0.5 * rule.weights[j] * inner * inner_len;
    }
    return sum * outer_len;
}

}  // namespace

RiceEvaluation partial_sum(const CovarianceModel& cov, const Boundary& b, double x0, double t,
                           int order, const SimplexQuadConfig& grid) {
    if (order < 1 || order > 3) throw ConfigError("partial sum order must be 1, 2 or 3");
    if (!(t > 0.0)) throw ConfigError("partial sums are defined for t > 0");
    if (grid.nodes == 0) throw ConfigError("simplex quadrature needs at least one node");
    if (!(grid.exclusion > 0.0) || !(grid.exclusion < 0.25))
        throw ConfigError("simplex exclusion must lie in (0, 0.25)");

    RiceEvaluation out;
    out.order = order;
    out.t = t;
    out.w1 = w1(cov, b, t, x0);
    out.partial_sums.push_back(out.w1);
    out.error_estimates.push_back(0.0);
    if (order == 1) return out;

    const double delta = grid.exclusion * t;
    SimplexQuadConfig cfg = grid;
    cfg.inner.abs_tol = std::max(cfg.inner.abs_tol, grid.inner_abs_factor * out.w1);
    double i2 = second_order_term(cov, b, x0, t, delta, grid.nodes, cfg.inner);
    double err2 = 0.0;
    if (grid.estimate_error) {
        const double fine = second_order_term(cov, b, x0, t, delta, 2 * grid.nodes, cfg.inner);
        err2 = std::abs(fine - i2);
        i2 = fine;
    }
    // excluded strips, bounded by the integrand at the cut
    err2 += delta * (w2_at(cov, b, x0, delta, t, cfg.inner) +
                     w2_at(cov, b, x0, t - delta, t, cfg.inner));
    out.partial_sums.push_back(out.w1 - i2);
    out.error_estimates.push_back(err2);
    if (order == 2) return out;

    double i3 = third_order_term(cov, b, x0, t, delta, grid.nodes, cfg.inner);
    double err3 = 0.0;
    if (grid.estimate_error) {
        const double fine = third_order_term(cov, b, x0, t, delta, 2 * grid.nodes, cfg.inner);
        err3 = std::abs(fine - i3);
        i3 = fine;
    }
    out.partial_sums.push_back(out.partial_sums.back() + i3);
    out.error_estimates.push_back(err2 + err3);
    return out;
}

std::vector<LimitDiagnosticRow> limit_diagnostics(const CovarianceModel& cov, const Boundary& b,
                                                  double x0, std::span<const double> tau,
                                                  std::span<const double> S0_ladder,
                                                  LimitMode mode, const QuadratureConfig& quad) {
    const std::size_t n = tau.size();
    require_order(n);
    if (mode == LimitMode::periodic && !b.is_periodic())
        throw ConfigError("periodic limit diagnostics need a boundary with a periodic limit");
    for (std::size_t i = 1; i < S0_ladder.size(); ++i)
        if (!(S0_ladder[i] > S0_ladder[i - 1])) throw ConfigError("S0 ladder must be increasing");

    const double c = -cov.ddgamma0();
    const auto nn = static_cast<Eigen::Index>(n);
    const double dn = static_cast<double>(n);
    std::vector<LimitDiagnosticRow> rows;
    for (double S0 : S0_ladder) {
        const Boundary level = b.with_level(S0);
        LimitDiagnosticRow row;
        row.S0 = S0;
        double log_prod_rate = 0.0;
        if (mode == LimitMode::constant) {
            const double R = r_const(cov, S0);
            for (double ti : tau) row.scaled_times.push_back(ti / R);
            log_prod_rate = dn * std::log(R);
        } else {
            const AsymptoticApproximation approx(cov, level);
            for (double ti : tau) row.scaled_times.push_back(approx.phi(ti / approx.alpha()));
            for (double th : row.scaled_times) log_prod_rate += std::log(approx.rate(th));
        }

        const LambdaMatrix lam = build_lambda(cov, row.scaled_times);
        row.det = lam.determinant;
        row.det_limit = std::pow(c, dn);
        for (Eigen::Index i = 0; i < lam.entries.rows(); ++i)
            for (Eigen::Index j = 0; j < lam.entries.cols(); ++j)
                if (i != j) row.max_offdiag = std::max(row.max_offdiag, std::abs(lam.entries(i, j)));

        Eigen::VectorXd psi(nn);
        double level_sq = 0.0;
        row.uv_ratio = 1.0;
        for (Eigen::Index i = 0; i < nn; ++i) {
            const double th = row.scaled_times[static_cast<std::size_t>(i)];
            psi(i) = level.S(th) - x0 * cov.gamma(th);
            const double dpsi = level.dS(th) - x0 * cov.dgamma(th);
            const double limit_slope = mode == LimitMode::periodic ? level.dZ(th) : 0.0;
            row.uv_ratio *= a_function(dpsi / std::sqrt(2.0 * c)) /
                            a_function(limit_slope / std::sqrt(2.0 * c));
            const double lim_level = mode == LimitMode::periodic ? S0 + level.Z(th) : S0;
            level_sq += lim_level * lim_level;
        }
        const double quad_form = psi.dot(lam.inverse.block(1, 1, nn, nn) * psi);
        if (mode == LimitMode::constant) {
            row.k_scaled = std::exp(-0.5 * quad_form - log_prod_rate);
            row.k_limit = std::pow(2.0 * std::numbers::pi, dn) / std::pow(c, 0.5 * dn);
        } else {
            row.k_scaled = std::exp(0.5 * level_sq - 0.5 * quad_form);
            row.k_limit = 1.0;
        }

        const WnResult w = wn(cov, level, row.scaled_times, x0, quad);
        const double inv_prod = std::exp(-log_prod_rate);
        row.wn_ratio = w.value * inv_prod;
        row.wn_ratio_error = w.error * inv_prod;
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace gaussfpt
