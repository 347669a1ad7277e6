#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "gaussfpt/covariance.hpp"
#include "gaussfpt/errors.hpp"
#include "oracles.hpp"

using namespace gaussfpt;

namespace {

// Ornstein-Uhlenbeck covariance, reported with gamma''(0) = +1: not mean-square differentiable.
class FlatCurvature final : public CovarianceModel {
public:
    double gamma(double t) const override { return std::exp(-std::abs(t)); }
    double dgamma(double t) const override {
        return t == 0.0 ? 0.0 : -std::copysign(1.0, t) * std::exp(-std::abs(t));
    }
    double ddgamma(double t) const override { return std::exp(-std::abs(t)); }
    double ddgamma0() const override { return 1.0; }
    double characteristic_time() const override { return 1.0; }
    std::string describe() const override { return "flat"; }
};

class SlowDecay final : public CovarianceModel {
public:
    double gamma(double t) const override { return std::cos(t) / (1.0 + t * t * 1e-6); }
    double dgamma(double t) const override {
        const double d = 1.0 + t * t * 1e-6;
        return -std::sin(t) / d - std::cos(t) * 2e-6 * t / (d * d);
    }
    double ddgamma(double t) const override {
        const double h = 1e-4;
        return (dgamma(t + h) - dgamma(t - h)) / (2 * h);
    }
    double ddgamma0() const override { return -1.0 - 2e-6; }
    double characteristic_time() const override { return 1.0; }
    std::string describe() const override { return "slow"; }
};

class WrongDerivative final : public CovarianceModel {
public:
    DampedOscillatoryCovariance base{1.0, 1.0};
    double gamma(double t) const override { return base.gamma(t); }
    double dgamma(double t) const override { return 1.001 * base.dgamma(t); }
    double ddgamma(double t) const override { return base.ddgamma(t); }
    double ddgamma0() const override { return base.ddgamma0(); }
    double characteristic_time() const override { return 1.0; }
    std::string describe() const override { return "wrong"; }
};

}  // namespace

TEST_CASE("damped oscillatory covariance values") {
    const DampedOscillatoryCovariance cov(1.0, 1.0);
    CHECK(cov.gamma(0.0) == 1.0);
    CHECK(cov.gamma(std::numbers::pi) == doctest::Approx(-std::exp(-std::numbers::pi)).epsilon(1e-14));
    CHECK(cov.gamma(-std::numbers::pi) == cov.gamma(std::numbers::pi));
    CHECK(std::abs(cov.gamma(std::numbers::pi) + 0.0432139) < 1e-7);
    CHECK(cov.dgamma(0.0) == 0.0);
    CHECK(std::abs(cov.dgamma(std::numbers::pi)) < 1e-15);
    CHECK(cov.ddgamma(0.0) == -2.0);
    CHECK(cov.ddgamma0() == -2.0);
    CHECK(cov.characteristic_time() == 1.0);
    CHECK(DampedOscillatoryCovariance(0.5, 4.0).characteristic_time() == 0.25);
}

TEST_CASE("gamma matches an independent transcription") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ut(-20.0, 20.0), ua(0.1, 3.0);
    for (int i = 0; i < 200; ++i) {
        const double a = ua(rng), w = ua(rng), t = ut(rng);
        const DampedOscillatoryCovariance cov(a, w);
        CHECK(cov.gamma(t) == doctest::Approx(oracle::gamma_damped(a, w, t)).epsilon(1e-13));
    }
}

TEST_CASE("invalid parameters are rejected") {
    CHECK_THROWS_AS(DampedOscillatoryCovariance(0.0, 1.0), ConfigError);
    CHECK_THROWS_AS(DampedOscillatoryCovariance(1.0, -1.0), ConfigError);
    CHECK_THROWS_AS(DampedOscillatoryCovariance(std::nan(""), 1.0), ConfigError);
}

TEST_CASE("parity holds to machine precision") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ut(1e-6, 20.0);
    const DampedOscillatoryCovariance cov(1.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double t = ut(rng);
        CHECK(cov.gamma(t) == cov.gamma(-t));
        CHECK(cov.dgamma(t) == -cov.dgamma(-t));
        CHECK(cov.ddgamma(t) == cov.ddgamma(-t));
    }
}

TEST_CASE("derivatives match central differences") {
    const DampedOscillatoryCovariance cov(1.0, 1.0);
    const double h = 1e-4;
    for (double t = 0.05; t < 12.0; t += 0.173) {
        const double fd1 = (cov.gamma(t + h) - cov.gamma(t - h)) / (2 * h);
        const double fd2 = (cov.gamma(t + h) - 2 * cov.gamma(t) + cov.gamma(t - h)) / (h * h);
        CHECK(std::abs(fd1 - cov.dgamma(t)) < 1e-6 * (std::abs(cov.dgamma(t)) + std::sqrt(2.0)));
        CHECK(std::abs(fd2 - cov.ddgamma(t)) < 1e-6 * (std::abs(cov.ddgamma(t)) + 2.0));
    }
    // the spot check at t = 1 on the relative scale
    const double fd = (cov.gamma(1 + h) - cov.gamma(1 - h)) / (2 * h);
    CHECK(std::abs(fd / cov.dgamma(1.0) - 1.0) < 1e-6);
}

TEST_CASE("envelope bound") {
    const DampedOscillatoryCovariance cov(1.0, 1.0);
    for (double t = 0.01; t < 30.0; t += 0.01) CHECK(std::abs(cov.gamma(t)) <= 2.0 * std::exp(-t));
    for (double t = 0.0; t < 30.0; t += 0.05) CHECK(std::abs(cov.gamma(t)) <= 1.0);
}

TEST_CASE("validate_assumptions") {
    const DampedOscillatoryCovariance cov(1.0, 1.0);
    const auto report = validate_assumptions(cov, 50.0, 1e-3);
    CHECK(report.passed());
    CHECK(report.checks.size() > 10);

    CHECK_THROWS_AS(validate_assumptions(FlatCurvature(), 50.0, 1e-3), AssumptionViolation);
    CHECK_THROWS_AS(validate_assumptions(SlowDecay(), 50.0, 1e-3), AssumptionViolation);
    CHECK_THROWS_AS(validate_assumptions(WrongDerivative(), 50.0, 1e-3), AssumptionViolation);
    CHECK_THROWS_AS(validate_assumptions(cov, 0.0, 1e-3), ConfigError);
    try {
        validate_assumptions(FlatCurvature(), 50.0, 1e-3);
    } catch (const AssumptionViolation& e) {
        CHECK(std::string(e.what()).find("ddgamma(0)") != std::string::npos);
        CHECK(e.kind() == ErrorKind::config);
    }
}

TEST_CASE("covariance_sequence") {
    const DampedOscillatoryCovariance cov(1.0, 1.0);
    const auto one = covariance_sequence(cov, 0.3, 1);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == 1.0);
    const auto two = covariance_sequence(cov, std::numbers::pi, 2);
    CHECK(two[1] == doctest::Approx(-std::exp(-std::numbers::pi)).epsilon(1e-14));
    const auto seq = covariance_sequence(cov, 0.01, 100);
    for (std::size_t k = 0; k < seq.size(); ++k) CHECK(seq[k] == cov.gamma(-0.01 * static_cast<double>(k)));
    CHECK_THROWS_AS(covariance_sequence(cov, 0.0, 4), ConfigError);
    CHECK_THROWS_AS(covariance_sequence(cov, 0.1, 0), ConfigError);
}
