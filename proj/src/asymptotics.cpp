#include "gaussfpt/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "gaussfpt/errors.hpp"
#include "gaussfpt/quadrature.hpp"
#include "gaussfpt/special.hpp"

namespace gaussfpt {

namespace {

constexpr std::size_t kPanelNodes = 8;

double rate_at_level(double c, double level, double slope) {
    return std::sqrt(c) / (2.0 * std::numbers::pi) * std::exp(-0.5 * level * level) *
           a_function(slope / std::sqrt(2.0 * c));
}

}  // namespace

double r_const(const CovarianceModel& cov, double S0) {
    const double c = -cov.ddgamma0();
    return std::sqrt(c) / (2.0 * std::numbers::pi) * std::exp(-0.5 * S0 * S0);
}

double r_periodic(const CovarianceModel& cov, const Boundary& b, double t) {
    return rate_at_level(-cov.ddgamma0(), b.S0() + b.Z(t), b.dZ(t));
}

double g_approx_const(const CovarianceModel& cov, double S0, double t) {
    const double R = r_const(cov, S0);
    return R * std::exp(-R * t);
}

AsymptoticApproximation::AsymptoticApproximation(const CovarianceModel& cov, const Boundary& b)
    : boundary_(b), c_(-cov.ddgamma0()), R0_(r_const(cov, b.S0())), alpha_(R0_) {
    if (!b.is_periodic()) return;
    const double Q = b.period();
    if (!(Q > 0.0) || !std::isfinite(Q)) throw ConfigError("boundary period Q must be positive");

    const auto& rule = gauss_legendre(kPanelNodes);
    const double width = Q / static_cast<double>(kPanels);
    std::vector<double> cumulative(kPanels + 1, 0.0);
    bool flat = true;
    for (std::size_t k = 0; k < kPanels; ++k) {
        const double lo = width * static_cast<double>(k);
        double sum = 0.0;
        for (std::size_t i = 0; i < kPanelNodes; ++i) {
            const double r = rate_at_level(c_, b.S0() + b.Z(lo + 0.5 * width * (rule.nodes[i] + 1.0)),
                                           b.dZ(lo + 0.5 * width * (rule.nodes[i] + 1.0)));
            flat = flat && r == R0_;
            sum += rule.weights[i] * r;
        }
        cumulative[k + 1] = cumulative[k] + 0.5 * width * sum;
    }
    if (flat) return;

    kind_ = ApproxKind::periodic;
    Q_ = Q;
    cumulative_ = std::move(cumulative);
    alpha_ = cumulative_.back() / Q_;
}

double AsymptoticApproximation::periodic_rate(double t) const {
    return rate_at_level(c_, boundary_.S0() + boundary_.Z(t), boundary_.dZ(t));
}

double AsymptoticApproximation::reduce(double t, double& whole_periods) const {
    whole_periods = std::floor(t / Q_);
    double r = t - whole_periods * Q_;
    if (r < 0.0) r = 0.0;
    if (r >= Q_) {
        whole_periods += 1.0;
        r = 0.0;
    }
    return r;
}

double AsymptoticApproximation::table_hazard(double t) const {
    const double width = Q_ / static_cast<double>(kPanels);
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(t / width), kPanels - 1);
    const double lo = width * static_cast<double>(k);
    return cumulative_[k] +
           integrate_gl([this](double s) { return periodic_rate(s); }, lo, t, kPanelNodes);
}

double AsymptoticApproximation::rate(double t) const {
    return kind_ == ApproxKind::constant ? R0_ : periodic_rate(t);
}

double AsymptoticApproximation::cumulative_hazard(double t) const {
    if (kind_ == ApproxKind::constant) return R0_ * t;
    double k = 0.0;
    const double r = reduce(t, k);
    return k * cumulative_.back() + table_hazard(r);
}

double AsymptoticApproximation::phi(double t) const {
    if (kind_ == ApproxKind::constant) return t;
    double k = 0.0;
    const double r = reduce(t, k);
    const double target = alpha_ * r;
    const double width = Q_ / static_cast<double>(kPanels);
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    const auto panel = std::min<std::size_t>(
        static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - cumulative_.begin() - 1, 0)),
        kPanels - 1);
    double lo = width * static_cast<double>(panel);
    double hi = lo + width;
    const double h_lo = cumulative_[panel];
    const double h_hi = cumulative_[panel + 1];
    double x = lo + width * std::clamp((target - h_lo) / (h_hi - h_lo), 0.0, 1.0);
    for (int iter = 0; iter < 60; ++iter) {
        const double f = table_hazard(x) - target;
        if (f == 0.0) break;
        if (f > 0.0) hi = x; else lo = x;
        double next = x - f / periodic_rate(x);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double step = std::abs(next - x);
        x = next;
        if (step <= 1e-15 * Q_) break;
    }
    return k * Q_ + x;
}

double AsymptoticApproximation::beta(double t) const {
    if (kind_ == ApproxKind::constant) return R0_;
    double k = 0.0;
    const double r = reduce(t, k);
    return periodic_rate(r) * std::exp(alpha_ * r - table_hazard(r));
}

double AsymptoticApproximation::density(double t) const {
    return rate(t) * std::exp(-cumulative_hazard(t));
}

double AsymptoticApproximation::survival(double t) const {
    return std::exp(-cumulative_hazard(t));
}

double alpha(const CovarianceModel& cov, const Boundary& b) {
    if (!b.is_periodic()) throw ConfigError("alpha needs a boundary with a periodic limit");
    return AsymptoticApproximation(cov, b).alpha();
}

std::vector<HypothesisReport> check_growth_hypothesis(const Boundary& b, const CovarianceModel& cov,
                                                      double x0,
                                                      std::span<const double> S0_ladder,
                                                      double t, double tol) {
    if (S0_ladder.empty()) throw ConfigError("S0 ladder must not be empty");
    for (std::size_t i = 1; i < S0_ladder.size(); ++i)
        if (!(S0_ladder[i] > S0_ladder[i - 1])) throw ConfigError("S0 ladder must be increasing");
    if (!(x0 < b.with_level(S0_ladder.front()).S(0.0)))
        throw ConfigError("x0 must lie below S(0) for every S0 on the ladder");
    if (!(t > 0.0)) throw ConfigError("growth check time must be positive");

    std::vector<HypothesisReport> reports;
    std::vector<double> ratios;
    for (double S0 : S0_ladder) {
        const Boundary level = b.with_level(S0);
        double ratio = 0.0;
        if (level.is_periodic()) {
            const AsymptoticApproximation approx(cov, level);
            const double theta = approx.phi(t / approx.alpha());
            ratio = std::abs(level.rho(theta)) / (S0 + level.Z(theta));
        } else {
            const double theta = t / r_const(cov, S0);
            ratio = std::abs(level.rho(theta)) / S0;
        }
        ratios.push_back(ratio);
        std::ostringstream name;
        name.precision(17);
        name << "growth ratio at S0=" << S0;
        reports.push_back({name.str(), ratio, tol, ratio < tol});
    }
    double worst_rise = 0.0;
    for (std::size_t i = 1; i < ratios.size(); ++i)
        worst_rise = std::max(worst_rise, ratios[i] - ratios[i - 1]);
    reports.push_back({"monotone", worst_rise, 0.0, worst_rise <= 0.0});
    const double last = ratios.back();
    reports.push_back({"below_tol", last, tol, last < tol});
    if (!(last < tol)) {
        std::ostringstream os;
        os << "growth ratio " << last << " at S0=" << S0_ladder.back() << " is not below " << tol;
        throw HypothesisViolation(os.str());
    }
    return reports;
}

double scaled_density_distance(const AsymptoticApproximation& approx, const ScalarFn& g,
                               std::span<const double> tau_grid) {
    double sup = 0.0;
    for (double tau : tau_grid) {
        const double s = tau / approx.alpha();
        const double scaled = g(approx.phi(s)) * approx.dphi(s) / approx.alpha();
        sup = std::max(sup, std::abs(scaled - std::exp(-tau)));
    }
    return sup;
}

ScaledLimitRow scaled_sample_distance(const AsymptoticApproximation& approx,
                                      const FptSample& sample, std::span<const double> tau_edges) {
    if (tau_edges.size() < 2) throw ConfigError("scaled limit check needs at least one bin");
    if (!(tau_edges.front() >= 0.0)) throw ConfigError("scaled bin edges must be non-negative");
    for (std::size_t i = 1; i < tau_edges.size(); ++i)
        if (!(tau_edges[i] > tau_edges[i - 1]))
            throw ConfigError("scaled bin edges must be increasing");
    if (sample.n_paths == 0) throw InsufficientPaths("no simulated paths");

    const double horizon = approx.cumulative_hazard(sample.t_max);
    if (horizon < tau_edges.back()) {
        std::ostringstream os;
        os << "simulated horizon reaches scaled time " << horizon << " < last edge "
           << tau_edges.back();
        throw InsufficientPaths(os.str());
    }
    if (sample.censored_fraction() > 0.1) {
        std::ostringstream os;
        os << "censored fraction " << sample.censored_fraction() << " exceeds 0.1";
        throw InsufficientPaths(os.str());
    }

    const std::size_t bins = tau_edges.size() - 1;
    std::vector<std::size_t> counts(bins, 0);
    for (double T : sample.times) {
        const double tau = approx.cumulative_hazard(T);
        const auto it = std::upper_bound(tau_edges.begin(), tau_edges.end(), tau);
        if (it == tau_edges.begin() || it == tau_edges.end()) continue;
        ++counts[static_cast<std::size_t>(it - tau_edges.begin() - 1)];
    }

    ScaledLimitRow row;
    row.censored_fraction = sample.censored_fraction();
    row.n_paths = sample.n_paths;
    const double N = static_cast<double>(sample.n_paths);
    for (std::size_t i = 0; i < bins; ++i) {
        const double a = tau_edges[i];
        const double w = tau_edges[i + 1] - a;
        const double mass = std::exp(-a) * -std::expm1(-w);
        const double dens = static_cast<double>(counts[i]) / (N * w);
        row.bin_density.push_back(dens);
        row.exact.push_back(mass / w);
        row.sup_distance = std::max(row.sup_distance, std::abs(dens - mass / w));
        row.noise_level = std::max(row.noise_level, kZ99 * std::sqrt(mass * (1.0 - mass) / N) / w);
    }
    return row;
}

ScaledLimitReport scaled_fpt_limit_check(const CovarianceModel& cov, const Boundary& b, double x0,
                                         std::span<const double> S0_ladder,
                                         std::span<const double> tau_edges,
                                         const ScaledLimitSettings& settings) {
    if (S0_ladder.empty()) throw ConfigError("S0 ladder must not be empty");
    for (std::size_t i = 1; i < S0_ladder.size(); ++i)
        if (!(S0_ladder[i] > S0_ladder[i - 1])) throw ConfigError("S0 ladder must be increasing");
    if (tau_edges.empty()) throw ConfigError("scaled limit check needs bin edges");

    ScaledLimitReport report;
    for (double S0 : S0_ladder) {
        const Boundary level = b.with_level(S0);
        const AsymptoticApproximation approx(cov, level);
        const double target = settings.horizon_margin * tau_edges.back();
        const double t_max = approx.phi(target / approx.alpha());
        const PathGrid grid = PathGrid::covering(settings.dt, t_max);
        SimConfig sim;
        sim.n_paths = settings.n_paths;
        sim.seed = settings.seed;
        sim.batch_size = settings.batch_size;
        sim.threads = settings.threads;
        sim.x0 = x0;
        const FptSample sample = simulate_fpt(cov, level, grid, sim);
        ScaledLimitRow row = scaled_sample_distance(approx, sample, tau_edges);
        row.S0 = S0;
        report.rows.push_back(std::move(row));
    }
    report.non_increasing = true;
    for (std::size_t i = 1; i < report.rows.size(); ++i)
        if (report.rows[i].sup_distance > report.rows[i - 1].sup_distance)
            report.non_increasing = false;
    return report;
}

}  // namespace gaussfpt
