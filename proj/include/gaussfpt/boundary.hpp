#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace gaussfpt {

using ScalarFn = std::function<double(double)>;

/// Q-periodic limit (Z, Z') of an asymptotically periodic perturbation, with zero mean over a period.
struct PeriodicLimit {
    ScalarFn Z;
    ScalarFn dZ;
    double Q;
};

/// The level-independent part rho(t) of a boundary S(t) = S0 + rho(t).
class Perturbation {
public:
    virtual ~Perturbation() = default;
    virtual double value(double t) const = 0;
    virtual double derivative(double t) const = 0;
    /// Present iff rho(t + kQ) -> Z(t) as k grows.
    virtual const PeriodicLimit* periodic_limit() const { return nullptr; }
    virtual std::string describe() const = 0;
};

/// A boundary S(t) = S0 + rho(t), t >= 0. Cheap to copy; the perturbation is shared and
/// immutable, so with_level() changes S0 and leaves rho untouched.
class Boundary {
public:
    Boundary(double S0, std::shared_ptr<const Perturbation> rho);

    double S(double t) const { return S0_ + rho_->value(t); }
    double dS(double t) const { return rho_->derivative(t); }
    double S0() const { return S0_; }
    double rho(double t) const { return rho_->value(t); }
    double drho(double t) const { return rho_->derivative(t); }

    bool is_periodic() const { return rho_->periodic_limit() != nullptr; }
    /// Z(t), Z'(t), Q of the periodic limit; throw ConfigError if the boundary has none.
    double Z(double t) const;
    double dZ(double t) const;
    double period() const;

    Boundary with_level(double S0) const { return Boundary(S0, rho_); }
    const Perturbation& perturbation() const { return *rho_; }
    std::string describe() const;

private:
    const PeriodicLimit& limit() const;

    double S0_;
    std::shared_ptr<const Perturbation> rho_;
};

/// S(t) = S0.
Boundary constant_boundary(double S0);

/// S(t) = S0 + B sin(2 pi t / Q). Its periodic limit is Z = rho exactly. Requires Q > 0.
Boundary sinusoidal_boundary(double S0, double B, double Q);

/// S(t) = S0 + rho(t) with rho, rho' -> 0. The supplied derivative is trusted.
Boundary asymptotically_constant_boundary(double S0, ScalarFn rho, ScalarFn drho,
                                          std::string label = "custom");

/// S(t) = S0 + rho(t) with rho(t + kQ) -> Z(t). Z and Z' are supplied analytically.
Boundary asymptotically_periodic_boundary(double S0, ScalarFn rho, ScalarFn drho,
                                          PeriodicLimit limit, std::string label = "custom");

struct HypothesisReport {
    std::string name;
    double measured;
    double limit;
    bool passed;
};

/// Verifies rho(t + k_max Q) ~ Z(t), rho'(t + k_max Q) ~ Z'(t) on a grid of [0, Q), and that
/// |int_0^Q Z| < tol Q max|Z|. Throws HypothesisViolation with the failing quantity.
std::vector<HypothesisReport> check_periodic_hypotheses(const Boundary& b, int k_max, double tol);

}  // namespace gaussfpt
