#include "gaussfpt/quadrature.hpp"

#include <map>
#include <mutex>
#include <numbers>
#include <queue>
#include <sstream>
#include <utility>

#include "gaussfpt/errors.hpp"

namespace gaussfpt {

namespace {

// (P_n(z), P_{n-1}(z)) by the three-term recurrence.
std::pair<double, double> legendre(std::size_t n, double z) {
    double p0 = 1.0;
    double p1 = z;
    for (std::size_t k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    return {p1, p0};
}

// Newton iteration on P_n from the Tricomi initial guess.
GaussLegendreRule build_rule(std::size_t n) {
    GaussLegendreRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const auto dn = static_cast<double>(n);
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (dn + 0.5));
        for (int iter = 0; iter < 100; ++iter) {
            const auto [p, q] = legendre(n, z);
            const double dz = p / (dn * (z * p - q) / (z * z - 1.0));
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        const auto [p, q] = legendre(n, z);
        const double dp = dn * (z * p - q) / (z * z - 1.0);
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        rule.nodes[i] = -z;
        rule.nodes[n - 1 - i] = z;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

struct Panel {
    double a;
    double b;
    double value;
    double error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

Panel score(const std::function<double(double)>& f, double a, double b) {
    constexpr std::size_t order = 10;
    const double whole = integrate_gl(f, a, b, order);
    const double mid = 0.5 * (a + b);
    const double halves = integrate_gl(f, a, mid, order) + integrate_gl(f, mid, b, order);
    return {a, b, halves, std::abs(halves - whole)};
}

}  // namespace

const GaussLegendreRule& gauss_legendre(std::size_t n) {
    if (n == 0) throw ConfigError("Gauss-Legendre rule needs at least one node");
    static std::mutex mutex;
    static std::map<std::size_t, GaussLegendreRule> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, build_rule(n)).first;
    return it->second;
}

QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    double rel_tol, double abs_tol, std::size_t max_panels) {
    if (a == b) return {0.0, 0.0};
    std::priority_queue<Panel> panels;
    panels.push(score(f, a, b));
    double total = panels.top().value;
    double error = panels.top().error;
    while (error > std::max(rel_tol * std::abs(total), abs_tol)) {
        if (panels.size() >= max_panels) {
            std::ostringstream os;
            os << "adaptive quadrature on [" << a << ", " << b << "] stalled at error " << error
               << " after " << panels.size() << " panels";
            throw QuadratureNotConverged(os.str());
        }
        const Panel worst = panels.top();
        panels.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const Panel left = score(f, worst.a, mid);
        const Panel right = score(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        panels.push(left);
        panels.push(right);
    }
    // re-sum to shed accumulated rounding from the running updates
    double sum = 0.0;
    double err = 0.0;
    while (!panels.empty()) {
        sum += panels.top().value;
        err += panels.top().error;
        panels.pop();
    }
    return {sum, err};
}

}  // namespace gaussfpt
