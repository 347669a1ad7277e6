#pragma once

#include <string>
#include <vector>

namespace gaussfpt {

/// Covariance of a zero-mean, unit-variance stationary Gaussian process that is
/// mean-square differentiable: gamma(0) = 1, gamma'(0) = 0, gamma''(0) < 0.
///
/// Implementations must be even in t (odd for the first derivative) and
/// immutable; every member is safe to call concurrently.
class CovarianceModel {
public:
    virtual ~CovarianceModel() = default;

    virtual double gamma(double t) const = 0;
    virtual double dgamma(double t) const = 0;
    virtual double ddgamma(double t) const = 0;

    /// gamma''(0) as an exact constant. The process derivative has variance -ddgamma0().
    virtual double ddgamma0() const = 0;

    /// Shortest time scale of the model, used to size finite-difference steps.
    virtual double characteristic_time() const = 0;

    virtual std::string describe() const = 0;
};

/// gamma(t) = exp(-a|t|) [cos(w t) + (a/w) sin(w|t|)]
class DampedOscillatoryCovariance final : public CovarianceModel {
public:
    /// Throws ConfigError unless a > 0 and omega > 0.
    DampedOscillatoryCovariance(double a, double omega);

    double gamma(double t) const override;
    double dgamma(double t) const override;
    double ddgamma(double t) const override;
    double ddgamma0() const override { return -(a_ * a_ + omega_ * omega_); }
    double characteristic_time() const override;
    std::string describe() const override;

    double a() const { return a_; }
    double omega() const { return omega_; }

private:
    double a_;
    double omega_;
};

struct AssumptionCheck {
    std::string name;
    double probe_t;   ///< probe time, or 0 for checks at the origin
    double value;     ///< measured quantity
    double limit;     ///< the bound it was compared against
    bool passed;
};

struct AssumptionReport {
    std::vector<AssumptionCheck> checks;
    bool passed() const;
};

/// Checks the standing assumptions on a covariance model:
///   - gamma(0) = 1, gamma'(0) = 0, gamma''(0) < 0 exactly;
///   - |gamma|, |gamma'|, |gamma''| < tol at probe times t_probe_max / 4, / 2 and t_probe_max;
///   - dgamma / ddgamma agree with central differences of gamma (step 1e-4 times the
///     characteristic time) to 1e-6, relative to the local value plus the derivative's scale.
/// Throws AssumptionViolation naming the first failed condition and its probe point.
AssumptionReport validate_assumptions(const CovarianceModel& model, double t_probe_max, double tol);

/// [gamma(0), gamma(dt), ..., gamma((n-1) dt)]. Throws ConfigError unless dt > 0 and n >= 1.
std::vector<double> covariance_sequence(const CovarianceModel& model, double dt, std::size_t n);

}  // namespace gaussfpt
