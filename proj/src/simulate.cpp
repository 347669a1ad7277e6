#include "gaussfpt/simulate.hpp"

#include <fftw3.h>

#include <algorithm>
#include <atomic>
#include <boost/random/normal_distribution.hpp>
#include <cmath>
#include <exception>
#include <iostream>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "gaussfpt/errors.hpp"

namespace gaussfpt {

namespace {

// The FFTW planner is not thread-safe; execution of an existing plan is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

std::size_t next_smooth(std::size_t n) {
    for (;; ++n) {
        std::size_t r = n;
        for (std::size_t p : {2u, 3u, 5u, 7u})
            while (r % p == 0) r /= p;
        if (r == 1) return n;
    }
}

std::vector<double> circulant_eigenvalues(const std::vector<double>& row) {
    const std::size_t m = row.size();
    auto* in = fftw_alloc_complex(m);
    auto* out = fftw_alloc_complex(m);
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_1d(static_cast<int>(m), in, out, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    for (std::size_t k = 0; k < m; ++k) {
        in[k][0] = row[k];
        in[k][1] = 0.0;
    }
    fftw_execute(plan);
    std::vector<double> eig(m);
    for (std::size_t k = 0; k < m; ++k) eig[k] = out[k][0];
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(out);
    return eig;
}

// X(t_i) = (Y(t_i) - gamma_i Y(0)) + gamma_i x0; for i = 0 this is x0 exactly.
inline double conditioned(double y, double g, double y0, double x0) {
    return (y - g * y0) + g * x0;
}

// Chord intersection on [t_{i-1}, t_i] given gaps d = X - S with prev <= 0 < cur.
inline double crossing_time(const PathGrid& grid, std::size_t i, double prev_gap, double cur_gap) {
    const double frac = prev_gap / (prev_gap - cur_gap);
    return grid.time(i - 1) + frac * grid.dt;
}

struct BatchResult {
    std::vector<double> times;
    std::size_t censored = 0;
};

}  // namespace

PathGrid PathGrid::covering(double dt, double t_max) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("grid.dt must be positive");
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw ConfigError("grid.t_max must be positive");
    const double steps = std::ceil(t_max / dt * (1.0 - 1e-12));
    return PathGrid{dt, static_cast<std::size_t>(steps) + 1};
}

void validate_grid(const CovarianceModel& cov, const PathGrid& grid, double guard) {
    if (!(grid.dt > 0.0) || !std::isfinite(grid.dt)) throw ConfigError("grid.dt must be positive");
    if (grid.n_steps < 2) throw ConfigError("grid needs at least 2 points");
    const double limit = guard * 2.0 * std::numbers::pi * cov.characteristic_time();
    if (grid.dt > limit) {
        std::ostringstream os;
        os << "grid.dt = " << grid.dt << " exceeds " << limit
           << " (fewer than " << 1.0 / guard << " samples per oscillation)";
        throw ConfigError(os.str());
    }
}

std::mt19937_64 batch_stream(std::uint64_t seed, std::uint64_t batch) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(batch), static_cast<std::uint32_t>(batch >> 32)};
    return std::mt19937_64(seq);
}

CirculantEmbedding::Workspace::Workspace(std::size_t m)
    : m_(m),
      in_(reinterpret_cast<double*>(fftw_alloc_complex(m))),
      out_(reinterpret_cast<double*>(fftw_alloc_complex(m))) {
    if (in_ == nullptr || out_ == nullptr) {
        fftw_free(in_);
        fftw_free(out_);
        throw std::bad_alloc();
    }
}

CirculantEmbedding::Workspace::~Workspace() {
    fftw_free(in_);
    fftw_free(out_);
}

CirculantEmbedding::CirculantEmbedding(const CovarianceModel& cov, const PathGrid& grid)
    : n_steps_(grid.n_steps) {
    validate_grid(cov, grid, std::numeric_limits<double>::infinity());
    const std::size_t first = next_smooth(std::max<std::size_t>(grid.n_steps - 1, 1));
    const std::size_t last = first << 10;

    std::vector<double> eig;
    for (std::size_t M = first;; M *= 2) {
        const std::size_t m = 2 * M;
        std::vector<double> row(m);
        for (std::size_t k = 0; k <= M; ++k) row[k] = cov.gamma(grid.time(k));
        for (std::size_t k = 1; k < M; ++k) row[m - k] = row[k];
        eig = circulant_eigenvalues(row);
        const double lmax = *std::max_element(eig.begin(), eig.end());
        const double lmin = *std::min_element(eig.begin(), eig.end());
        min_ratio_ = lmin / lmax;
        m_ = m;
        if (min_ratio_ >= -1e-8) break;
        if (M >= last) {
            if (min_ratio_ < -1e-6) {
                std::ostringstream os;
                os << "circulant embedding has eigenvalue ratio " << min_ratio_
                   << " after padding to length " << m;
                throw EmbeddingFailure(os.str());
            }
            break;
        }
    }

    sqrt_eig_.resize(m_);
    const double inv_m = 1.0 / static_cast<double>(m_);
    for (std::size_t k = 0; k < m_; ++k) {
        if (eig[k] < 0.0) {
            ++clipped_;
            sqrt_eig_[k] = 0.0;
        } else {
            sqrt_eig_[k] = std::sqrt(eig[k] * inv_m);
        }
    }

    Workspace probe(m_);
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_1d(static_cast<int>(m_), reinterpret_cast<fftw_complex*>(probe.in_),
                             reinterpret_cast<fftw_complex*>(probe.out_), FFTW_FORWARD,
                             FFTW_ESTIMATE);
    if (plan_ == nullptr) throw EmbeddingFailure("FFTW could not create a plan");
}

CirculantEmbedding::~CirculantEmbedding() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_));
}

void CirculantEmbedding::sample_pair(std::mt19937_64& rng, Workspace& ws, std::span<double> first,
                                     std::span<double> second) const {
    if (ws.m_ != m_) throw ConfigError("workspace does not match the embedding size");
    if (first.size() < n_steps_ || second.size() < n_steps_)
        throw ConfigError("path buffers are shorter than the grid");
    boost::random::normal_distribution<double> normal;
    double* in = ws.in_;
    for (std::size_t k = 0; k < m_; ++k) {
        const double z1 = normal(rng);
        const double z2 = normal(rng);
        in[2 * k] = sqrt_eig_[k] * z1;
        in[2 * k + 1] = sqrt_eig_[k] * z2;
    }
    fftw_execute_dft(static_cast<fftw_plan>(plan_), reinterpret_cast<fftw_complex*>(ws.in_),
                     reinterpret_cast<fftw_complex*>(ws.out_));
    const double* out = ws.out_;
    for (std::size_t i = 0; i < n_steps_; ++i) {
        first[i] = out[2 * i];
        second[i] = out[2 * i + 1];
    }
}

std::vector<std::vector<double>> gen_unconditional_paths(const CovarianceModel& cov,
                                                         const PathGrid& grid, std::size_t n,
                                                         std::mt19937_64& rng) {
    const CirculantEmbedding emb(cov, grid);
    auto ws = emb.workspace();
    std::vector<std::vector<double>> paths;
    paths.reserve(n);
    std::vector<double> a(grid.n_steps);
    std::vector<double> b(grid.n_steps);
    while (paths.size() < n) {
        emb.sample_pair(rng, ws, a, b);
        paths.push_back(a);
        if (paths.size() < n) paths.push_back(b);
    }
    return paths;
}

void condition_on_start(std::span<double> path, std::span<const double> gamma_seq, double x0) {
    if (gamma_seq.size() < path.size())
        throw ConfigError("covariance sequence shorter than the path");
    if (path.empty()) return;
    const double y0 = path[0];
    for (std::size_t i = 0; i < path.size(); ++i)
        path[i] = conditioned(path[i], gamma_seq[i], y0, x0);
}

void condition_on_start(std::span<double> path, const CovarianceModel& cov, const PathGrid& grid,
                        double x0) {
    if (path.empty()) return;
    const auto seq = covariance_sequence(cov, grid.dt, path.size());
    condition_on_start(path, seq, x0);
}

std::optional<double> detect_fpt(std::span<const double> path, const Boundary& b,
                                 const PathGrid& grid) {
    const std::size_t n = std::min(path.size(), grid.n_steps);
    if (n == 0) return std::nullopt;
    double prev_gap = path[0] - b.S(0.0);
    for (std::size_t i = 1; i < n; ++i) {
        const double gap = path[i] - b.S(grid.time(i));
        if (gap > 0.0) return crossing_time(grid, i, prev_gap, gap);
        prev_gap = gap;
    }
    return std::nullopt;
}

FptSample simulate_fpt(const CovarianceModel& cov, const Boundary& b, const PathGrid& grid,
                       const SimConfig& sim) {
    if (sim.n_paths < 1) throw ConfigError("sim.n_paths must be at least 1");
    if (sim.batch_size < 1) throw ConfigError("sim.batch_size must be at least 1");
    if (!(sim.x0 < b.S(0.0))) {
        std::ostringstream os;
        os << "x0 = " << sim.x0 << " must lie below S(0) = " << b.S(0.0);
        throw ConfigError(os.str());
    }
    validate_grid(cov, grid);

    const CirculantEmbedding emb(cov, grid);
    const std::size_t n = grid.n_steps;
    const auto gamma_seq = covariance_sequence(cov, grid.dt, n);
    std::vector<double> level(n);
    for (std::size_t i = 0; i < n; ++i) level[i] = b.S(grid.time(i));
    const double x0 = sim.x0;

    const std::size_t n_batches = (sim.n_paths + sim.batch_size - 1) / sim.batch_size;
    std::vector<BatchResult> results(n_batches);
    std::atomic<std::size_t> next{0};

    auto run_path = [&](std::span<const double> y, BatchResult& out) {
        const double y0 = y[0];
        double prev_gap = x0 - level[0];
        for (std::size_t i = 1; i < n; ++i) {
            const double gap = conditioned(y[i], gamma_seq[i], y0, x0) - level[i];
            if (gap > 0.0) {
                out.times.push_back(crossing_time(grid, i, prev_gap, gap));
                return;
            }
            prev_gap = gap;
        }
        ++out.censored;
    };

    auto worker = [&]() {
        auto ws = emb.workspace();
        std::vector<double> p1(n);
        std::vector<double> p2(n);
        for (std::size_t k = next.fetch_add(1); k < n_batches; k = next.fetch_add(1)) {
            auto rng = batch_stream(sim.seed, k);
            const std::size_t count = std::min(sim.batch_size, sim.n_paths - k * sim.batch_size);
            BatchResult& out = results[k];
            for (std::size_t j = 0; j < count; j += 2) {
                emb.sample_pair(rng, ws, p1, p2);
                run_path(p1, out);
                if (j + 1 < count) run_path(p2, out);
            }
        }
    };

    unsigned threads = sim.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                        : sim.threads;
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_batches));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::exception_ptr> errors(threads);
        {
            std::vector<std::jthread> pool;
            pool.reserve(threads);
            for (unsigned w = 0; w < threads; ++w) {
                pool.emplace_back([&, w]() {
                    try {
                        worker();
                    } catch (...) {
                        errors[w] = std::current_exception();
                        next.store(n_batches);
                    }
                });
            }
        }
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    FptSample sample;
    sample.n_paths = sim.n_paths;
    sample.t_max = grid.t_max();
    sample.dt = grid.dt;
    sample.seed = sim.seed;
    for (auto& r : results) {
        sample.times.insert(sample.times.end(), r.times.begin(), r.times.end());
        sample.n_censored += r.censored;
    }
    return sample;
}

FptHistogram make_histogram(const FptSample& sample, double bin_width) {
    if (!(bin_width > 0.0) || !std::isfinite(bin_width))
        throw ConfigError("sim.bin_width must be positive");
    if (!(sample.t_max > 0.0)) throw ConfigError("sample horizon must be positive");
    if (sample.n_paths == 0) throw InsufficientPaths("no simulated paths");

    const double ratio = sample.t_max / bin_width;
    const double whole = std::round(ratio);
    const auto bins = static_cast<std::size_t>(
        std::abs(ratio - whole) <= 1e-9 * ratio ? std::max(whole, 1.0) : std::ceil(ratio));

    FptHistogram h;
    h.bin_width = bin_width;
    h.n_paths = sample.n_paths;
    h.n_censored = sample.n_censored;
    h.edges.resize(bins + 1);
    for (std::size_t i = 0; i < bins; ++i) h.edges[i] = bin_width * static_cast<double>(i);
    h.edges[bins] = sample.t_max;
    h.bin_counts.assign(bins, 0);
    for (double t : sample.times) {
        const auto idx = std::min(static_cast<std::size_t>(std::max(t, 0.0) / bin_width), bins - 1);
        ++h.bin_counts[idx];
    }
    const double N = static_cast<double>(sample.n_paths);
    h.density.resize(bins);
    h.ci_halfwidth.resize(bins);
    for (std::size_t i = 0; i < bins; ++i) {
        const double w = h.width(i);
        const double p = static_cast<double>(h.bin_counts[i]) / N;
        h.density[i] = p / w;
        h.ci_halfwidth[i] = kZ99 * std::sqrt(p * (1.0 - p) / N) / w;
    }
    return h;
}

FptHistogram estimate_density(const CovarianceModel& cov, const Boundary& b, const PathGrid& grid,
                              const SimConfig& sim, double bin_width) {
    const FptSample sample = simulate_fpt(cov, b, grid, sim);
    if (sample.censored_fraction() > 0.5)
        std::cerr << "warning: " << sample.n_censored << " of " << sample.n_paths
                  << " paths did not cross by t_max = " << sample.t_max << "\n";
    return make_histogram(sample, bin_width);
}

FptHistogram rebin(const FptHistogram& h, std::span<const double> edges) {
    if (edges.size() < 2) throw ConfigError("rebinning needs at least one bin");
    for (std::size_t k = 1; k < edges.size(); ++k)
        if (!(edges[k] > edges[k - 1])) throw ConfigError("rebinning edges must be increasing");
    FptHistogram out;
    out.bin_width = edges[1] - edges[0];
    out.edges.assign(edges.begin(), edges.end());
    out.n_paths = h.n_paths;
    out.n_censored = h.n_censored;
    const std::size_t bins = edges.size() - 1;
    out.bin_counts.assign(bins, 0);
    for (std::size_t i = 0; i < h.size(); ++i) {
        const auto it = std::upper_bound(edges.begin(), edges.end(), h.center(i));
        if (it == edges.begin() || it == edges.end()) continue;
        out.bin_counts[static_cast<std::size_t>(it - edges.begin() - 1)] += h.bin_counts[i];
    }
    const double N = static_cast<double>(h.n_paths);
    out.density.resize(bins);
    out.ci_halfwidth.resize(bins);
    for (std::size_t k = 0; k < bins; ++k) {
        const double w = out.width(k);
        const double p = static_cast<double>(out.bin_counts[k]) / N;
        out.density[k] = p / w;
        out.ci_halfwidth[k] = kZ99 * std::sqrt(p * (1.0 - p) / N) / w;
    }
    return out;
}

TailFit tail_rate_fit(const FptHistogram& h, double t_lo, double t_hi) {
    if (!(t_lo < t_hi)) throw ConfigError("tail fit window needs t_lo < t_hi");
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double c = h.center(i);
        if (c < t_lo || c > t_hi || h.bin_counts[i] < 5) continue;
        x.push_back(c);
        y.push_back(std::log(h.density[i]));
    }
    if (x.size() < 10) {
        std::ostringstream os;
        os << "tail fit over [" << t_lo << ", " << t_hi << "] has " << x.size()
           << " bins with count >= 5; need 10";
        throw InsufficientData(os.str());
    }
    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    const double slope = sxy / sxx;
    double sse = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (my + slope * (x[i] - mx));
        sse += r * r;
    }
    return {-slope, std::sqrt(sse / (n - 2.0) / sxx), x.size()};
}

LogDensityAutocorrelation log_density_autocorrelation(const FptHistogram& h, double t_lo,
                                                      double t_hi, double max_lag) {
    if (!(t_lo < t_hi)) throw ConfigError("autocorrelation window needs t_lo < t_hi");
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double c = h.center(i);
        if (c < t_lo || c > t_hi) continue;
        if (h.bin_counts[i] < 5) {
            std::ostringstream os;
            os << "bin at t = " << c << " has " << h.bin_counts[i]
               << " crossings; autocorrelation needs at least 5 per bin";
            throw InsufficientData(os.str());
        }
        x.push_back(c);
        y.push_back(std::log(h.density[i]));
    }
    if (x.size() < 4) throw InsufficientData("autocorrelation window holds fewer than 4 bins");

    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    const double slope = sxy / sxx;
    std::vector<double> r(x.size());
    double r2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        r[i] = y[i] - (my + slope * (x[i] - mx));
        r2 += r[i] * r[i];
    }

    const auto max_bins = std::min<std::size_t>(
        static_cast<std::size_t>(max_lag / h.bin_width), x.size() - 1);
    LogDensityAutocorrelation out;
    for (std::size_t L = 1; L <= max_bins; ++L) {
        double s = 0.0;
        for (std::size_t i = 0; i + L < r.size(); ++i) s += r[i] * r[i + L];
        out.lags.push_back(h.bin_width * static_cast<double>(L));
        out.values.push_back(r2 > 0.0 ? s / r2 : 0.0);
    }
    if (out.values.empty()) throw InsufficientData("no lags fit in the autocorrelation window");

    // Short lags are correlated by smoothness alone; look past the first local minimum.
    std::size_t start = 0;
    while (start + 1 < out.values.size() && out.values[start + 1] <= out.values[start]) ++start;
    std::size_t best = start;
    for (std::size_t i = start; i < out.values.size(); ++i)
        if (out.values[i] > out.values[best]) best = i;
    out.peak_lag = out.lags[best];
    return out;
}

}  // namespace gaussfpt
