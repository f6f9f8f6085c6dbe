#pragma once

#include "linger/distributions.hpp"
#include "linger/model.hpp"
#include "linger/rng.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace linger {

// Monte-Carlo checks of the max-of-walks bounds, the T* - tau_max bound, the
// drift heuristic and the conditioned-walk quantities. Every verdict allows a
// one-sided guard band of kGuardSigmas standard errors.

inline constexpr double kGuardSigmas = 3.0;

/// Step law of a random walk with its mean and variance.
///
/// `distribution` walks take i.i.d. steps from `law`. `hitting_time` walks
/// take steps distributed as the time a walk with increments xi - 1 needs to
/// go from 1 to 0 (xi = `law`); W(x) is then the time to drain x packets.
struct WalkSpec {
    enum class Kind { distribution, hitting_time };

    Kind kind = Kind::distribution;
    DistributionSpec law;
    double step_mean = 0.0;
    double step_variance = 0.0;

    static WalkSpec from_distribution(const DistributionSpec& steps);
    /// Mean 1/(1 - E xi), variance Var(xi)/(1 - E xi)^3.
    static WalkSpec hitting_time(const DistributionSpec& xi);
};

/// Draws W(x), the walk after x steps.
class WalkSampler {
public:
    explicit WalkSampler(const WalkSpec& spec);
    std::uint64_t sample(std::uint64_t x, RngStream& rng) const;
    const WalkSpec& spec() const noexcept { return spec_; }

private:
    WalkSpec spec_;
    Distribution law_;
};

struct BoundCheck {
    double empirical = 0.0;
    double bound = 0.0;
    double stderr = 0.0;
    bool satisfied = false;
    std::uint64_t n_samples = 0;
};

/// E max_r W_r(x_r) <= m |x|_inf + R (w |x|_inf)^(1/2), R = x.size().
BoundCheck verify_bound_max(std::span<const std::uint64_t> x, const WalkSpec& spec, std::uint64_t n_samples,
                            RngStream& rng);

/// E[(max_j W_j(x_j))^(1/2)] >= (m |x|_inf)^(1/2) - (w / m^(3/2)) |x|_inf^(-1/2).
BoundCheck verify_bound_max_sqrt(std::span<const std::uint64_t> x, const WalkSpec& spec, std::uint64_t n_samples,
                                 RngStream& rng);

struct GapAtState {
    std::vector<std::uint64_t> a;
    double mean_gap = 0.0;  // E_a(T* - tau_max)
    double stderr = 0.0;
};

struct TStarGapResult {
    std::vector<GapAtState> states;
    double max_mean_gap = 0.0;
    /// OLS slope of mean gap against log |a|_inf over states with |a|_inf >= 1,
    /// with the standard error propagated from the Monte-Carlo errors.
    double slope = 0.0;
    double slope_stderr = 0.0;
    bool no_growth = true;  // slope <= kGuardSigmas * slope_stderr
};

/// Estimates E_a(T* - tau_max) for each start state (beta must be infinite).
/// State i uses streams (seed, i) whatever the model, so two calls that differ
/// only in the load are paired.
TStarGapResult verify_tstar_gap(const std::vector<std::vector<std::uint64_t>>& grid, const Model& model,
                                std::uint64_t n_per_state, std::uint64_t seed, int workers = 1);

struct HittingTimeCheck {
    std::uint64_t a = 0;
    double mean = 0.0;
    double stderr = 0.0;
    double expected = 0.0;  // a / (1 - E xi)
    double z_score = 0.0;
    bool satisfied = false;
};

/// Mean time for an active queue (beta infinite) to drain from a.
HittingTimeCheck hitting_time_check(std::uint64_t a, const DistributionSpec& xi, std::uint64_t n_samples,
                                    RngStream& rng);

struct DriftEstimate {
    double two_delta = 0.0;  // E xi + E[active one-slot change]
    double stderr = 0.0;
    double heuristic = 0.0;  // rho - 1 + z psi(a)
};

/// Mean drift of one queue averaged over its active and inactive halves.
DriftEstimate estimate_drift(std::uint64_t a, const Model& model, std::uint64_t n_samples, RngStream& rng);

struct DriftBracket {
    double lower = 0.0;  // drift estimate > 0 here
    double upper = 0.0;  // and < 0 here
    double predicted = 0.0;  // (1-rho)^(-1/beta) - 1 for z = 1
    int evaluations = 0;
};

/// Bisection (in log a) on the Monte-Carlo drift with common random numbers.
DriftBracket bracket_drift_root(const Model& model, std::uint64_t a_lo, std::uint64_t a_hi,
                                std::uint64_t n_samples, std::uint64_t seed, double ratio = 1.1);

struct ConditionedPath {
    std::vector<std::int64_t> path;  // W(0..horizon), W(0) = 0, W(k) >= 1 for k >= 1
    std::uint64_t attempts = 0;
};

/// Rejection sampler for the walk with steps 1 - xi conditioned to stay >= 1
/// after time 0, truncated at `horizon`.
ConditionedPath sample_conditioned_walk(std::uint64_t horizon, const Distribution& xi, RngStream& rng,
                                        std::uint64_t max_attempts = 10'000'000);

struct LocalTimeProfile {
    std::vector<double> mean;  // E L(a), a = 0..max_level
    std::vector<double> stderr;
    double acceptance_rate = 0.0;
    double supremum = 0.0;
    std::uint64_t n_paths = 0;
};

/// E(number of visits of the conditioned walk to level a) for a = 0..max_level.
LocalTimeProfile conditioned_local_times(std::uint64_t horizon, const DistributionSpec& xi, int max_level,
                                         std::uint64_t n_paths, std::uint64_t seed, int workers = 1);

struct ReleaseCountResult {
    std::uint64_t horizon = 0;
    std::uint64_t n_samples = 0;
    double p_zero = 0.0;
    double p_zero_stderr = 0.0;
    std::vector<double> tail;     // P(N > n), n = 0..tail.size()-1
    std::vector<double> tail_2h;  // same with the horizon doubled
    std::vector<std::uint64_t> histogram;  // counts of N = n, last bin is ">= size-1"
    double max_horizon_gap = 0.0;
    double tolerance = 0.0;
    bool inconclusive = false;
    double acceptance_rate = 0.0;
};

/// Number of releases N = sum_{k>=1} 1{U_k < psi(W(k))} along the conditioned
/// walk. The k = 0 term is left out: W(0) = 0 always releases.
ReleaseCountResult release_count_distribution(Beta beta, std::uint64_t horizon, std::uint64_t n_samples,
                                              const DistributionSpec& xi, std::uint64_t seed, int workers = 1,
                                              int max_n = 10, double tolerance = 0.01);

struct TailEstimate {
    double exponent_hat = 0.0;
    double stderr = 0.0;
    std::uint64_t n_samples = 0;
    std::uint64_t n_finite = 0;
    std::uint64_t truncation_horizon = 0;
    int bins_used = 0;
};

/// Power-law exponent of P(B = k), B the first k >= 1 at which the
/// conditioned walk releases: log-log fit of the pmf over log-spaced bins with
/// at least `min_bin_count` samples and k >= k_min.
TailEstimate tail_exponent_B(Beta beta, std::uint64_t horizon, std::uint64_t n_samples, const DistributionSpec& xi,
                             std::uint64_t seed, int workers = 1, std::uint64_t k_min = 20,
                             std::uint64_t min_bin_count = 30);

struct AScalingPoint {
    std::uint64_t a1 = 0;
    double mean = 0.0;  // E_(a1,...,a1)(A_1(T*)), averaged over positions
    double stderr = 0.0;
};

struct AScalingResult {
    std::vector<AScalingPoint> points;
    double slope = 0.0;  // log-log
    double slope_stderr = 0.0;
    bool degenerate = false;  // A(T*) identically 0
};

/// Growth of E(A_1(T*)) with a symmetric start (a1, ..., a1).
AScalingResult scaling_of_A_at_Tstar(const Model& model, const std::vector<std::uint64_t>& a1_grid,
                                     std::uint64_t n_samples, std::uint64_t seed, int workers = 1);

struct BoundInstance {
    std::vector<std::uint64_t> x;
    WalkSpec spec;
    BoundCheck check;
};

struct BoundSuiteResult {
    std::vector<BoundInstance> instances;
    int violations = 0;
};

/// Randomized instances of verify_bound_max (or of verify_bound_max_sqrt when
/// `sqrt_form`): 1 to 4 walks, starts up to 200, step laws drawn from every
/// kind plus hitting-time steps.
BoundSuiteResult verify_bound_suite(int n_instances, std::uint64_t n_samples, std::uint64_t seed, bool sqrt_form,
                                    int workers = 1);

struct LingeringPoint {
    std::uint64_t a = 0;
    double mean_gap = 0.0;  // E[T* - tau_(1)]
    double stderr = 0.0;
};

struct LingeringScaling {
    std::vector<LingeringPoint> points;
    double slope = 0.0;  // log E[T* - tau_(1)] against log a
    double slope_stderr = 0.0;
};

/// Cycles from symmetric starts (a, ..., a) with beta infinite.
LingeringScaling lingering_scaling(const Model& model, const std::vector<std::uint64_t>& a_grid,
                                   std::uint64_t n_cycles, std::uint64_t seed, int workers = 1);

}  // namespace linger
