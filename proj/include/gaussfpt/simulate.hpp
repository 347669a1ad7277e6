#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "gaussfpt/boundary.hpp"
#include "gaussfpt/covariance.hpp"

namespace gaussfpt {

/// Uniform time grid t_i = i dt, i = 0 .. n_steps - 1.
struct PathGrid {
    double dt = 0.01;
    std::size_t n_steps = 2;

    double t_max() const { return dt * static_cast<double>(n_steps - 1); }
    double time(std::size_t i) const { return dt * static_cast<double>(i); }

    /// Smallest grid with spacing dt that reaches t_max.
    static PathGrid covering(double dt, double t_max);
};

/// Throws ConfigError unless dt > 0, n_steps >= 2 and dt <= guard * 2 pi * characteristic time.
void validate_grid(const CovarianceModel& cov, const PathGrid& grid, double guard = 0.1);

struct SimConfig {
    std::size_t n_paths = 100000;
    std::uint64_t seed = 1;
    std::size_t batch_size = 1000;
    double x0 = 0.0;
    unsigned threads = 0;  ///< 0 selects std::thread::hardware_concurrency()
};

/// Engine for batch k: std::mt19937_64 seeded with
/// std::seed_seq{seed_lo, seed_hi, k_lo, k_hi} (32-bit halves of seed and k).
std::mt19937_64 batch_stream(std::uint64_t seed, std::uint64_t batch);

/// Circulant embedding of gamma on a grid. Immutable after construction; sample_pair may be
/// called concurrently with one Workspace per thread.
class CirculantEmbedding {
public:
    /// FFT buffers for one thread.
    class Workspace {
    public:
        explicit Workspace(std::size_t m);
        ~Workspace();
        Workspace(const Workspace&) = delete;
        Workspace& operator=(const Workspace&) = delete;

    private:
        friend class CirculantEmbedding;
        std::size_t m_;
        double* in_;   ///< m interleaved complex values
        double* out_;
    };

    /// The circulant has length 2M with M >= n_steps - 1 a 7-smooth number. M doubles while
    /// some eigenvalue is below -1e-8 lambda_max, at most to 2^10 times its first value.
    /// Eigenvalues above -1e-6 lambda_max are then clipped to 0; anything lower throws
    /// EmbeddingFailure.
    CirculantEmbedding(const CovarianceModel& cov, const PathGrid& grid);
    ~CirculantEmbedding();
    CirculantEmbedding(const CirculantEmbedding&) = delete;
    CirculantEmbedding& operator=(const CirculantEmbedding&) = delete;

    std::size_t circulant_size() const { return m_; }
    std::size_t n_steps() const { return n_steps_; }
    std::size_t clipped() const { return clipped_; }
    double min_eigenvalue_ratio() const { return min_ratio_; }
    Workspace workspace() const { return Workspace(m_); }

    /// Two independent stationary paths of length n_steps from one complex FFT of
    /// sqrt(lambda_k / m) (Z1_k + i Z2_k); the normals are drawn in the order Z1_0, Z2_0, Z1_1, ...
    void sample_pair(std::mt19937_64& rng, Workspace& ws, std::span<double> first,
                     std::span<double> second) const;

private:
    std::size_t n_steps_;
    std::size_t m_;
    std::vector<double> sqrt_eig_;  ///< sqrt(lambda_k / m)
    std::size_t clipped_ = 0;
    double min_ratio_ = 0.0;
    void* plan_ = nullptr;
};

/// n unconditional stationary paths on the grid, drawn pairwise from `rng`.
std::vector<std::vector<double>> gen_unconditional_paths(const CovarianceModel& cov,
                                                         const PathGrid& grid, std::size_t n,
                                                         std::mt19937_64& rng);

/// X(t_i) = Y(t_i) - gamma(t_i) Y(0) + gamma(t_i) x0, in place. gamma_seq[i] = gamma(t_i).
void condition_on_start(std::span<double> path, std::span<const double> gamma_seq, double x0);
void condition_on_start(std::span<double> path, const CovarianceModel& cov, const PathGrid& grid,
                        double x0);

/// First grid crossing X(t_i) > S(t_i), i >= 1, refined by intersecting the chords of X and S
/// on [t_{i-1}, t_i]. Empty if the path stays at or below the boundary up to t_max.
std::optional<double> detect_fpt(std::span<const double> path, const Boundary& b,
                                 const PathGrid& grid);

/// Raw simulation output. Crossing times are stored in path order, so merging is a concatenation
/// in batch order.
struct FptSample {
    std::vector<double> times;
    std::size_t n_paths = 0;
    std::size_t n_censored = 0;
    double t_max = 0.0;
    double dt = 0.0;
    std::uint64_t seed = 0;

    double censored_fraction() const {
        return n_paths == 0 ? 0.0 : static_cast<double>(n_censored) / static_cast<double>(n_paths);
    }
};

/// Simulates first-passage times of X given X(0) = x0. Throws ConfigError if x0 >= S(0) or the
/// grid is too coarse; EmbeddingFailure from the embedding. Output does not depend on threads.
FptSample simulate_fpt(const CovarianceModel& cov, const Boundary& b, const PathGrid& grid,
                       const SimConfig& sim);

struct FptHistogram {
    double bin_width = 0.0;
    std::vector<double> edges;  ///< bin_counts.size() + 1 entries; the last bin may be shorter
    std::vector<std::size_t> bin_counts;
    std::size_t n_paths = 0;
    std::size_t n_censored = 0;
    std::vector<double> density;       ///< count / (n_paths * width)
    std::vector<double> ci_halfwidth;  ///< 99% normal approximation

    std::size_t size() const { return bin_counts.size(); }
    double center(std::size_t i) const { return 0.5 * (edges[i] + edges[i + 1]); }
    double width(std::size_t i) const { return edges[i + 1] - edges[i]; }
    double censored_fraction() const {
        return n_paths == 0 ? 0.0 : static_cast<double>(n_censored) / static_cast<double>(n_paths);
    }
};

inline constexpr double kZ99 = 2.5758293035489004;

/// Bins [0, t_max] in steps of bin_width.
FptHistogram make_histogram(const FptSample& sample, double bin_width);

/// simulate_fpt followed by make_histogram. Logs a warning to stderr when more than half of
/// the paths are censored.
FptHistogram estimate_density(const CovarianceModel& cov, const Boundary& b, const PathGrid& grid,
                              const SimConfig& sim, double bin_width);

/// Sums the bins of h whose centres fall in [edges[k], edges[k+1]). Paths outside the new range
/// count as neither censored nor binned, so n_paths and n_censored are carried over unchanged.
FptHistogram rebin(const FptHistogram& h, std::span<const double> edges);

struct TailFit {
    double rate = 0.0;
    double standard_error = 0.0;
    std::size_t bins_used = 0;
};

/// Negated least-squares slope of log density on bin centre over bins whose centre lies in
/// [t_lo, t_hi] and whose count is at least 5. Throws InsufficientData below 10 such bins.
TailFit tail_rate_fit(const FptHistogram& h, double t_lo, double t_hi);

struct LogDensityAutocorrelation {
    std::vector<double> lags;    ///< in time units, multiples of the bin width
    std::vector<double> values;  ///< normalized autocorrelation
    double peak_lag = 0.0;       ///< lag of the largest value at lag >= 1 bin
};

/// Autocorrelation of the linearly detrended log density over the bins with centres in
/// [t_lo, t_hi]. Every bin in the window needs count >= 5, else InsufficientData.
LogDensityAutocorrelation log_density_autocorrelation(const FptHistogram& h, double t_lo,
                                                      double t_hi, double max_lag);

}  // namespace gaussfpt
