#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "gaussfpt/asymptotics.hpp"
#include "gaussfpt/errors.hpp"
#include "gaussfpt/quadrature.hpp"
#include "oracles.hpp"

using namespace gaussfpt;

namespace {

const DampedOscillatoryCovariance kCov(1.0, 1.0);

}  // namespace

TEST_CASE("constant rate values") {
    CHECK(std::abs(r_const(kCov, 2.0) - 0.0304611) < 1e-6);
    CHECK(std::abs(r_const(kCov, 2.5) - 0.00988928) < 1e-6);
    CHECK(r_const(kCov, 2.0) == doctest::Approx(std::exp(-2.0) / (std::numbers::pi * std::sqrt(2.0))).epsilon(1e-15));
    CHECK(r_const(kCov, 0.0) == doctest::Approx(std::sqrt(2.0) / (2.0 * std::numbers::pi)).epsilon(1e-15));
    CHECK(r_const(kCov, 0.0) > r_const(kCov, 0.5));
    CHECK(r_const(kCov, 40.0) < 1e-300);
    const double R = r_const(kCov, 2.0);
    CHECK(g_approx_const(kCov, 2.0, 0.0) == R);
    CHECK(g_approx_const(kCov, 2.0, 1.0 / R) == doctest::Approx(0.0112058).epsilon(1e-5));
    const auto mass = integrate_adaptive([](double t) { return g_approx_const(kCov, 2.0, t); }, 0.0,
                                         2000.0, 1e-12);
    CHECK(mass.value + std::exp(-R * 2000.0) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("periodic rate") {
    const Boundary wave = sinusoidal_boundary(2.0, 0.5, 3.0);
    CHECK(r_periodic(kCov, wave, 0.75) == doctest::Approx(0.00988928).epsilon(1e-6));
    for (double t = 0.0; t < 3.0; t += 0.13) {
        CHECK(r_periodic(kCov, wave, t + 3.0) == doctest::Approx(r_periodic(kCov, wave, t)).epsilon(1e-13));
        CHECK(r_periodic(kCov, wave, t) > 0.0);
        CHECK(r_periodic(kCov, sinusoidal_boundary(2.0, 0.0, 3.0), t) == r_const(kCov, 2.0));
    }
    CHECK_THROWS_AS(r_periodic(kCov, constant_boundary(2.0), 1.0), ConfigError);
}

TEST_CASE("periodic rate closed form against the slope integral") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> t_dist(0.0, 30.0);
    std::uniform_real_distribution<double> s_dist(1.0, 4.0);
    std::uniform_real_distribution<double> b_dist(-1.5, 1.5);
    std::uniform_real_distribution<double> q_dist(0.5, 6.0);
    for (int i = 0; i < 100; ++i) {
        const Boundary b = sinusoidal_boundary(s_dist(rng), b_dist(rng), q_dist(rng));
        const double t = t_dist(rng);
        const double exact = oracle::r_periodic_integral(2.0, b.S0() + b.Z(t), b.dZ(t));
        INFO(b.describe() << " t=" << t);
        CHECK(r_periodic(kCov, b, t) == doctest::Approx(exact).epsilon(1e-8));
    }
}

TEST_CASE("alpha") {
    const Boundary wave = sinusoidal_boundary(2.0, 0.5, 3.0);
    const double a = alpha(kCov, wave);
    CHECK(a == doctest::Approx(oracle::alpha_trapezoid(2.0, wave, 100000)).epsilon(1e-8));
    CHECK(alpha(kCov, sinusoidal_boundary(2.0, 0.0, 3.0)) == r_const(kCov, 2.0));
    double previous = a;
    for (double S0 : {4.0, 8.0}) {
        const double next = alpha(kCov, wave.with_level(S0));
        CHECK(next > 0.0);
        CHECK(next < previous);
        previous = next;
    }
    CHECK(previous < 1e-13);
    CHECK_THROWS_AS(alpha(kCov, constant_boundary(2.0)), ConfigError);
}

TEST_CASE("approximation kinds") {
    const AsymptoticApproximation constant(kCov, constant_boundary(2.0));
    CHECK(constant.kind() == ApproxKind::constant);
    CHECK(constant.period() == 0.0);
    CHECK(constant.alpha() == constant.R0());
    const AsymptoticApproximation flat(kCov, sinusoidal_boundary(2.0, 0.0, 3.0));
    CHECK(flat.kind() == ApproxKind::constant);
    for (double t : {0.0, 0.3, 7.0, 120.0}) {
        CHECK(flat.density(t) == constant.density(t));
        CHECK(flat.beta(t) == constant.beta(t));
        CHECK(flat.phi(t) == t);
        CHECK(flat.density(t) == g_approx_const(kCov, 2.0, t));
    }
    const AsymptoticApproximation wave(kCov, sinusoidal_boundary(2.0, 0.5, 3.0));
    CHECK(wave.kind() == ApproxKind::periodic);
    CHECK(wave.period() == 3.0);
    CHECK(wave.alpha() > 0.0);
}

TEST_CASE("phi contract") {
    const AsymptoticApproximation approx(kCov, sinusoidal_boundary(2.0, 0.5, 3.0));
    const double Q = 3.0;
    CHECK(approx.phi(0.0) == 0.0);
    for (int k = 1; k <= 5; ++k) CHECK(std::abs(approx.phi(k * Q) - k * Q) < 1e-9 * Q);

    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> dist(0.0, 20.0 * Q);
    double last_t = -1.0;
    std::vector<double> ts;
    for (int i = 0; i < 1000; ++i) ts.push_back(dist(rng));
    std::sort(ts.begin(), ts.end());
    double last_phi = -1.0;
    for (double t : ts) {
        const double p = approx.phi(t);
        CHECK(approx.cumulative_hazard(p) == doctest::Approx(approx.alpha() * t).epsilon(1e-9));
        for (int k = 1; k <= 5; ++k)
            CHECK(std::abs(approx.phi(t + k * Q) - p - k * Q) < 1e-9 * Q);
        if (t > last_t) CHECK(p > last_phi);
        last_t = t;
        last_phi = p;
        const double h = 1e-5;
        const double fd = (approx.phi(t + h) - approx.phi(t - h)) / (2.0 * h);
        if (t > h) CHECK(fd == doctest::Approx(approx.dphi(t)).epsilon(1e-5));
    }
}

TEST_CASE("beta periodicity and consistency") {
    const AsymptoticApproximation approx(kCov, sinusoidal_boundary(2.0, 0.5, 3.0));
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> dist(0.0, 60.0);
    for (int i = 0; i < 1000; ++i) {
        const double t = dist(rng);
        const double b = approx.beta(t);
        CHECK(b > 0.0);
        CHECK(std::abs(approx.beta(t + 3.0) - b) < 1e-10 * b);
        const double g = approx.density(t);
        CHECK(std::abs(g - b * std::exp(-approx.alpha() * t)) < 1e-12 * g);
    }
}

TEST_CASE("hazard identity and total mass") {
    const Boundary wave = sinusoidal_boundary(2.0, 0.5, 3.0);
    const AsymptoticApproximation approx(kCov, wave);
    for (double t = 0.0; t < 200.0; t += 1.7) {
        const double cdf = integrate_adaptive([&](double s) { return approx.density(s); }, 0.0, t,
                                              1e-12, 1e-15).value;
        CHECK(approx.density(t) / (1.0 - cdf) == doctest::Approx(r_periodic(kCov, wave, t)).epsilon(1e-8));
        CHECK(approx.survival(t) == doctest::Approx(1.0 - cdf).epsilon(1e-10));
    }
    const double T = 600.0;
    const double mass = integrate_adaptive([&](double s) { return approx.density(s); }, 0.0, T,
                                           1e-12, 1e-15, 1 << 14).value;
    CHECK(mass + approx.survival(T) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("scaled density distance") {
    const AsymptoticApproximation wave(kCov, sinusoidal_boundary(2.0, 0.5, 3.0));
    const AsymptoticApproximation flat(kCov, constant_boundary(2.0));
    std::vector<double> tau;
    for (int i = 0; i <= 50; ++i) tau.push_back(0.08 * i);
    CHECK(scaled_density_distance(wave, [&](double t) { return wave.density(t); }, tau) < 1e-10);
    CHECK(scaled_density_distance(flat, [](double t) { return g_approx_const(kCov, 2.0, t); }, tau) < 1e-12);
    CHECK(scaled_density_distance(flat, [](double t) { return g_approx_const(kCov, 2.2, t); }, tau) > 0.1);
}

TEST_CASE("scaled sample distance on an exact sample") {
    // Inverse-transform sample of the approximation itself: the distance is pure sampling noise.
    const AsymptoticApproximation approx(kCov, sinusoidal_boundary(2.0, 0.5, 3.0));
    std::mt19937_64 rng(23);
    std::exponential_distribution<double> e(1.0);
    FptSample sample;
    sample.n_paths = 200000;
    sample.t_max = approx.phi(5.0 / approx.alpha());
    sample.dt = 0.01;
    for (std::size_t i = 0; i < sample.n_paths; ++i) {
        const double tau = e(rng);
        if (tau >= 5.0) {
            ++sample.n_censored;
            continue;
        }
        sample.times.push_back(approx.phi(tau / approx.alpha()));
    }
    std::vector<double> edges;
    for (int i = 0; i <= 35; ++i) edges.push_back(0.1 * i);
    const ScaledLimitRow row = scaled_sample_distance(approx, sample, edges);
    CHECK(row.sup_distance < 1.5 * row.noise_level);
    CHECK(row.bin_density.size() == 35);
    CHECK(row.exact[0] == doctest::Approx((1.0 - std::exp(-0.1)) / 0.1).epsilon(1e-12));

    FptSample short_horizon = sample;
    short_horizon.t_max = approx.phi(2.0 / approx.alpha());
    CHECK_THROWS_AS(scaled_sample_distance(approx, short_horizon, edges), InsufficientPaths);
}
