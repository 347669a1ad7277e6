#include "gaussfpt/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gaussfpt/errors.hpp"

namespace gaussfpt {

DampedOscillatoryCovariance::DampedOscillatoryCovariance(double a, double omega)
    : a_(a), omega_(omega) {
    if (!(a > 0.0) || !std::isfinite(a))
        throw ConfigError("covariance.a must be a positive finite number");
    if (!(omega > 0.0) || !std::isfinite(omega))
        throw ConfigError("covariance.omega must be a positive finite number");
}

double DampedOscillatoryCovariance::gamma(double t) const {
    const double at = std::abs(t);
    return std::exp(-a_ * at) * (std::cos(omega_ * at) + (a_ / omega_) * std::sin(omega_ * at));
}

double DampedOscillatoryCovariance::dgamma(double t) const {
    // sin is odd, so this form is already odd in t
    const double k = (a_ * a_ + omega_ * omega_) / omega_;
    return -k * std::exp(-a_ * std::abs(t)) * std::sin(omega_ * t);
}

double DampedOscillatoryCovariance::ddgamma(double t) const {
    if (t == 0.0) return ddgamma0();
    const double at = std::abs(t);
    const double k = (a_ * a_ + omega_ * omega_) / omega_;
    return k * std::exp(-a_ * at) * (a_ * std::sin(omega_ * at) - omega_ * std::cos(omega_ * at));
}

double DampedOscillatoryCovariance::characteristic_time() const {
    return 1.0 / std::max(a_, omega_);
}

std::string DampedOscillatoryCovariance::describe() const {
    std::ostringstream os;
    os.precision(17);
    os << "damped_oscillatory(a=" << a_ << ", omega=" << omega_ << ")";
    return os.str();
}

bool AssumptionReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

namespace {

void record(AssumptionReport& report, std::string name, double t, double value, double limit,
            bool ok) {
    report.checks.push_back({name, t, value, limit, ok});
    if (!ok) {
        std::ostringstream os;
        os.precision(10);
        os << "covariance assumption violated: " << name << " at t=" << t << " (value " << value
           << ", limit " << limit << ")";
        throw AssumptionViolation(os.str());
    }
}

}  // namespace

AssumptionReport validate_assumptions(const CovarianceModel& model, double t_probe_max,
                                      double tol) {
    if (!(t_probe_max > 0.0)) throw ConfigError("t_probe_max must be positive");
    if (!(tol > 0.0)) throw ConfigError("tol must be positive");

    AssumptionReport report;
    record(report, "gamma(0) == 1", 0.0, model.gamma(0.0), 1.0, model.gamma(0.0) == 1.0);
    record(report, "dgamma(0) == 0", 0.0, model.dgamma(0.0), 0.0, model.dgamma(0.0) == 0.0);
    record(report, "ddgamma(0) < 0", 0.0, model.ddgamma0(), 0.0, model.ddgamma0() < 0.0);

    for (double t : {t_probe_max / 4.0, t_probe_max / 2.0, t_probe_max}) {
        record(report, "|gamma| -> 0", t, std::abs(model.gamma(t)), tol,
               std::abs(model.gamma(t)) < tol);
        record(report, "|dgamma| -> 0", t, std::abs(model.dgamma(t)), tol,
               std::abs(model.dgamma(t)) < tol);
        record(report, "|ddgamma| -> 0", t, std::abs(model.ddgamma(t)), tol,
               std::abs(model.ddgamma(t)) < tol);
    }

    const double tau = model.characteristic_time();
    const double h = 1e-4 * tau;
    const double d1_scale = std::sqrt(-model.ddgamma0());
    const double d2_scale = -model.ddgamma0();
    for (int k = 1; k <= 40; ++k) {
        const double t = 0.37 * tau * k;
        const double g_plus = model.gamma(t + h);
        const double g_minus = model.gamma(t - h);
        const double fd1 = (g_plus - g_minus) / (2.0 * h);
        const double fd2 = (g_plus - 2.0 * model.gamma(t) + g_minus) / (h * h);
        const double d1 = model.dgamma(t);
        const double d2 = model.ddgamma(t);
        const double err1 = std::abs(fd1 - d1) / (std::abs(d1) + d1_scale);
        const double err2 = std::abs(fd2 - d2) / (std::abs(d2) + d2_scale);
        record(report, "dgamma matches finite difference", t, err1, 1e-6, err1 < 1e-6);
        record(report, "ddgamma matches finite difference", t, err2, 1e-6, err2 < 1e-6);
    }
    return report;
}

std::vector<double> covariance_sequence(const CovarianceModel& model, double dt, std::size_t n) {
    if (!(dt > 0.0)) throw ConfigError("covariance sequence step must be positive");
    if (n == 0) throw ConfigError("covariance sequence needs at least one entry");
    std::vector<double> seq(n);
    for (std::size_t k = 0; k < n; ++k) seq[k] = model.gamma(static_cast<double>(k) * dt);
    return seq;
}

}  // namespace gaussfpt
