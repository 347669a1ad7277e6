#include "gaussfpt/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "gaussfpt/errors.hpp"
#include "gaussfpt/quadrature.hpp"

namespace gaussfpt {

namespace {

class ZeroPerturbation final : public Perturbation {
public:
    double value(double) const override { return 0.0; }
    double derivative(double) const override { return 0.0; }
    std::string describe() const override { return "constant"; }
};

class SinusoidPerturbation final : public Perturbation {
public:
    SinusoidPerturbation(double B, double Q) : B_(B), Q_(Q) {
        limit_.Z = [B, Q](double t) { return B * std::sin(2.0 * std::numbers::pi * t / Q); };
        limit_.dZ = [B, Q](double t) {
            const double k = 2.0 * std::numbers::pi / Q;
            return B * k * std::cos(k * t);
        };
        limit_.Q = Q;
    }
    double value(double t) const override { return limit_.Z(t); }
    double derivative(double t) const override { return limit_.dZ(t); }
    const PeriodicLimit* periodic_limit() const override { return &limit_; }
    std::string describe() const override {
        std::ostringstream os;
        os.precision(17);
        os << "sinusoidal(B=" << B_ << ", Q=" << Q_ << ")";
        return os.str();
    }

private:
    double B_;
    double Q_;
    PeriodicLimit limit_;
};

class CallablePerturbation final : public Perturbation {
public:
    CallablePerturbation(ScalarFn rho, ScalarFn drho, std::optional<PeriodicLimit> limit,
                         std::string label)
        : rho_(std::move(rho)), drho_(std::move(drho)), limit_(std::move(limit)),
          label_(std::move(label)) {}
    double value(double t) const override { return rho_(t); }
    double derivative(double t) const override { return drho_(t); }
    const PeriodicLimit* periodic_limit() const override { return limit_ ? &*limit_ : nullptr; }
    std::string describe() const override { return label_; }

private:
    ScalarFn rho_;
    ScalarFn drho_;
    std::optional<PeriodicLimit> limit_;
    std::string label_;
};

}  // namespace

Boundary::Boundary(double S0, std::shared_ptr<const Perturbation> rho)
    : S0_(S0), rho_(std::move(rho)) {
    if (!std::isfinite(S0)) throw ConfigError("boundary.S0 must be finite");
    if (!rho_) throw ConfigError("boundary perturbation must not be null");
}

const PeriodicLimit& Boundary::limit() const {
    const PeriodicLimit* lim = rho_->periodic_limit();
    if (lim == nullptr) throw ConfigError("boundary " + describe() + " has no periodic limit");
    return *lim;
}

double Boundary::Z(double t) const { return limit().Z(t); }
double Boundary::dZ(double t) const { return limit().dZ(t); }
double Boundary::period() const { return limit().Q; }

std::string Boundary::describe() const {
    std::ostringstream os;
    os.precision(17);
    os << "S0=" << S0_ << " + " << rho_->describe();
    return os.str();
}

Boundary constant_boundary(double S0) {
    static const auto zero = std::make_shared<const ZeroPerturbation>();
    return Boundary(S0, zero);
}

Boundary sinusoidal_boundary(double S0, double B, double Q) {
    if (!(Q > 0.0) || !std::isfinite(Q)) throw ConfigError("boundary.Q must be positive");
    if (!std::isfinite(B)) throw ConfigError("boundary.B must be finite");
    return Boundary(S0, std::make_shared<const SinusoidPerturbation>(B, Q));
}

Boundary asymptotically_constant_boundary(double S0, ScalarFn rho, ScalarFn drho,
                                          std::string label) {
    if (!rho || !drho) throw ConfigError("perturbation callables must be set");
    return Boundary(S0, std::make_shared<const CallablePerturbation>(
                            std::move(rho), std::move(drho), std::nullopt, std::move(label)));
}

Boundary asymptotically_periodic_boundary(double S0, ScalarFn rho, ScalarFn drho,
                                          PeriodicLimit limit, std::string label) {
    if (!rho || !drho || !limit.Z || !limit.dZ)
        throw ConfigError("perturbation callables must be set");
    if (!(limit.Q > 0.0)) throw ConfigError("period Q must be positive");
    return Boundary(S0, std::make_shared<const CallablePerturbation>(
                            std::move(rho), std::move(drho), std::move(limit), std::move(label)));
}

std::vector<HypothesisReport> check_periodic_hypotheses(const Boundary& b, int k_max, double tol) {
    if (!b.is_periodic())
        throw HypothesisViolation("boundary " + b.describe() + " has no periodic limit");
    if (k_max < 0) throw ConfigError("k_max must be non-negative");

    const double Q = b.period();
    const double shift = static_cast<double>(k_max) * Q;
    constexpr int grid = 256;
    double sup_value = 0.0;
    double sup_slope = 0.0;
    double sup_Z = 0.0;
    for (int i = 0; i < grid; ++i) {
        const double t = Q * i / grid;
        sup_value = std::max(sup_value, std::abs(b.rho(t + shift) - b.Z(t)));
        sup_slope = std::max(sup_slope, std::abs(b.drho(t + shift) - b.dZ(t)));
        sup_Z = std::max(sup_Z, std::abs(b.Z(t)));
    }
    const double mean_integral =
        integrate_adaptive([&](double t) { return b.Z(t); }, 0.0, Q, 1e-13, 1e-300).value;

    std::vector<HypothesisReport> out{
        {"sup |rho(t+kQ) - Z(t)|", sup_value, tol, sup_value < tol},
        {"sup |rho'(t+kQ) - Z'(t)|", sup_slope, tol, sup_slope < tol},
        {"|int_0^Q Z|", std::abs(mean_integral), tol * Q * sup_Z,
         std::abs(mean_integral) <= tol * Q * sup_Z},
    };
    for (const auto& r : out) {
        if (!r.passed) {
            std::ostringstream os;
            os.precision(10);
            os << "periodic hypothesis violated: " << r.name << " = " << r.measured
               << " exceeds " << r.limit << " (k_max=" << k_max << ")";
            throw HypothesisViolation(os.str());
        }
    }
    return out;
}

}  // namespace gaussfpt
