#pragma once

#include "linger/estimators.hpp"
#include "linger/model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace linger {

/// One load of a heavy-traffic sweep.
struct SweepPoint {
    double rho = 0.0;
    double F = 0.0;
    double mean = 0.0;
    double ci = 0.0;
    std::uint64_t n_epochs = 0;

    double x() const;  // log(1/(1-rho))
};

/// Least-squares fit F = alpha + log C / x, x = log(1/(1-rho)).
struct RegressionResult {
    double alpha_hat = 0.0;
    double log_c_hat = 0.0;
    std::size_t window_start = 0;  // index (in rho order) of the first fitted point
    std::size_t n_fitted = 0;
    double rss = 0.0;
};

/// Fits only the points at or past the minimum of F (ties go to the largest
/// index). Points are sorted by rho first. When the minimum is the last point
/// (F decreasing over the whole sweep) every point is fitted.
RegressionResult fit_alpha(std::vector<SweepPoint> points);

/// Same regression on every point, without the minimum rule.
RegressionResult fit_alpha_all_points(std::vector<SweepPoint> points);

/// Loads whose x = log(1/(1-rho)) is evenly spaced on [x_lo, x_hi].
std::vector<double> rho_grid_for_x(double x_lo = 2.0, double x_hi = 5.3, int n = 10);

struct SweepOptions {
    Beta beta{2.0};
    int R = 2;
    DistributionSpec zeta = DistributionSpec::point_mass(1);
    std::vector<double> rho_grid = rho_grid_for_x();
    std::uint64_t epochs_per_point = 20'000;
    double burn_in_fraction = 0.2;
    int n_batches = kDefaultBatches;
    std::uint64_t seed = 1;
    int workers = 1;
    std::uint64_t max_slots = 1'000'000'000;
};

struct SweepPointStatus {
    double rho = 0.0;
    std::optional<SweepPoint> point;
    std::string error;  // set when the point failed
};

struct SweepOutcome {
    std::vector<SweepPointStatus> statuses;  // grid order
    std::vector<SweepPoint> points;          // successful points, grid order
    std::optional<RegressionResult> fit;
    std::string fit_error;
};

/// Estimates one sweep point: geometric arrivals at load rho, chain started
/// empty, `epochs_per_point` switches on stream (seed, index).
SweepPoint estimate_sweep_point(const SweepOptions& options, double rho, std::size_t index);

/// Runs every grid point (in parallel, one stream per point) and fits alpha.
/// Point failures are recorded and the sweep continues.
SweepOutcome sweep_alpha(const SweepOptions& options);

}  // namespace linger
