#pragma once

#include "linger/model.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace linger {

inline constexpr int kDefaultBatches = 30;

/// Default warm-up: the first 20% of epochs.
constexpr std::uint64_t default_burn_in(std::uint64_t n_epochs) noexcept { return n_epochs / 5; }

struct EstimatorResult {
    double mean = 0.0;           // time average of |Q(k)| after burn-in
    double ci_half_width = 0.0;  // 95% batch-means half width
    std::uint64_t n_epochs = 0;
    std::uint64_t burn_in = 0;
    int n_batches = 0;
};

/// Time average over values[burn_in..] with a non-overlapping batch-means
/// confidence interval.
EstimatorResult stationary_mean(std::span<const double> values, std::uint64_t burn_in,
                                int n_batches = kDefaultBatches);

/// log(mean) / log(1/(1-rho)).
double scaling_F(double mean, double rho);

/// Geometric-mean ratio |Q(k+1)|/|Q(k)| over the trailing half. Empty when the
/// trailing half touches 0 (the chain is not transient).
std::optional<double> growth_rate(std::span<const double> trajectory);

/// growth_rate restricted to the part of the trajectory after it first
/// exceeds `threshold`. Empty if it never does.
std::optional<double> growth_rate_above(std::span<const double> trajectory, double threshold);

struct LingeringStats {
    double mean_t_star = 0.0;
    double mean_tau_max = 0.0;
    double mean_gap_t_star_tau_max = 0.0;  // E[T* - tau_max]
    double mean_gap_t_star_tau_min = 0.0;  // E[T* - tau_(1)]
    double idle_fraction = 0.0;            // idle slots of the first-emptied queue / all slots
    std::uint64_t n_cycles = 0;
};

/// Streaming form of lingering_stats for runs too long to keep every record.
class LingeringAccumulator {
public:
    void add(const CycleRecord& record);
    LingeringStats result() const;

private:
    std::uint64_t n_ = 0;
    std::uint64_t n_tau_max_ = 0;
    std::uint64_t n_tau_min_ = 0;
    double sum_t_star_ = 0.0;
    double sum_tau_max_ = 0.0;
    double sum_gap_max_ = 0.0;
    double sum_gap_min_ = 0.0;
    double idle_ = 0.0;
    double slots_ = 0.0;
};

LingeringStats lingering_stats(std::span<const CycleRecord> records);

struct StationarityCheck {
    double lhs = 0.0;        // mean per-queue active length at switching epochs
    double rhs = 0.0;        // E(xi) * mean T*
    double z_score = 0.0;    // paired difference over its batch-means standard error
    double stderr = 0.0;
    double lhs_total = 0.0;  // mean |Q^a|
    double rhs_total = 0.0;  // R E(xi) mean T*
};

/// Checks E(A_1(0)) = E(xi) E(T*) on a stationary beta = infinity run. Pairs
/// the active vector at epoch k+1 with the T* of the cycle that produced it;
/// `active_totals` and `t_stars` are indexed by epoch, the cycle of epoch k
/// starting from the state of epoch k.
StationarityCheck check_stationarity_identity(std::span<const double> active_totals, std::span<const double> t_stars,
                                              int R, double mean_xi, std::uint64_t burn_in,
                                              int n_batches = kDefaultBatches);

}  // namespace linger
