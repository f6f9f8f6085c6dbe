#include "linger/regression.hpp"

#include "linger/errors.hpp"
#include "linger/parallel.hpp"
#include "linger/stats.hpp"

#include <algorithm>
#include <cmath>

namespace linger {

namespace {

constexpr std::uint64_t kSweepTag = 0x5357454550ULL;  // "SWEEP"

void sort_by_rho(std::vector<SweepPoint>& points)
{
    std::sort(points.begin(), points.end(), [](const SweepPoint& a, const SweepPoint& b) { return a.rho < b.rho; });
}

RegressionResult fit_window(const std::vector<SweepPoint>& points, std::size_t start)
{
    std::vector<double> inv_x;
    std::vector<double> f;
    for (std::size_t i = start; i < points.size(); ++i) {
        inv_x.push_back(1.0 / points[i].x());
        f.push_back(points[i].F);
    }
    const LineFit line = fit_line(inv_x, f);
    return {line.intercept, line.slope, start, inv_x.size(), line.rss};
}

}  // namespace

double SweepPoint::x() const
{
    return std::log(1.0 / (1.0 - rho));
}

RegressionResult fit_alpha(std::vector<SweepPoint> points)
{
    if (points.size() < 6) {
        throw ParameterError("fit_alpha needs at least 6 sweep points");
    }
    sort_by_rho(points);
    std::size_t argmin = 0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (points[i].F <= points[argmin].F) {
            argmin = i;
        }
    }
    // A minimum on the last grid point means F never turned upward: the whole
    // sweep is on the decreasing branch of a + b/x (b > 0) and is fitted.
    if (argmin == points.size() - 1) {
        return fit_window(points, 0);
    }
    if (points.size() - argmin < 4) {
        throw InsufficientWindowError("only " + std::to_string(points.size() - argmin) +
                                      " sweep points at or past the minimum of F (need 4)");
    }
    return fit_window(points, argmin);
}

RegressionResult fit_alpha_all_points(std::vector<SweepPoint> points)
{
    if (points.size() < 2) {
        throw ParameterError("regression needs at least 2 sweep points");
    }
    sort_by_rho(points);
    return fit_window(points, 0);
}

std::vector<double> rho_grid_for_x(double x_lo, double x_hi, int n)
{
    if (n < 2 || !(x_lo > 0.0) || !(x_hi > x_lo)) {
        throw ParameterError("rho grid needs n >= 2 and 0 < x_lo < x_hi");
    }
    std::vector<double> grid;
    for (int i = 0; i < n; ++i) {
        const double x = x_lo + (x_hi - x_lo) * i / (n - 1);
        grid.push_back(1.0 - std::exp(-x));
    }
    return grid;
}

SweepPoint estimate_sweep_point(const SweepOptions& options, double rho, std::size_t index)
{
    if (!(rho > 0.0 && rho < 1.0)) {
        throw ParameterError("sweep loads must lie in (0, 1)");
    }
    ModelParams params;
    params.R = options.R;
    params.beta = options.beta;
    params.xi = geometric_xi_for_load(rho);
    params.zeta = options.zeta;
    const Model model(params);
    ChainStreams streams(options.seed, derive_stream_id(kSweepTag, index), options.R);

    std::vector<double> totals;
    totals.reserve(options.epochs_per_point);
    CycleOptions cycle;
    cycle.max_slots = options.max_slots;
    run_chain(SystemState::zeros(options.R), options.epochs_per_point, model, streams,
              [&](std::uint64_t, const SystemState& q, const CycleRecord&) {
                  totals.push_back(static_cast<double>(q.total()));
              },
              cycle);
    const auto burn_in = static_cast<std::uint64_t>(options.burn_in_fraction * static_cast<double>(totals.size()));
    const EstimatorResult est = stationary_mean(totals, burn_in, options.n_batches);
    return {rho, scaling_F(est.mean, rho), est.mean, est.ci_half_width, est.n_epochs};
}

SweepOutcome sweep_alpha(const SweepOptions& options)
{
    for (std::size_t i = 1; i < options.rho_grid.size(); ++i) {
        if (!(options.rho_grid[i] > options.rho_grid[i - 1])) {
            throw ParameterError("rho grid must be strictly increasing");
        }
    }
    SweepOutcome out;
    out.statuses = parallel_map(options.rho_grid.size(), options.workers, [&](std::size_t i) {
        SweepPointStatus status;
        status.rho = options.rho_grid[i];
        try {
            status.point = estimate_sweep_point(options, status.rho, i);
        } catch (const std::exception& e) {
            status.error = "rho=" + std::to_string(status.rho) + ": " + e.what();
        }
        return status;
    });
    for (const auto& s : out.statuses) {
        if (s.point) {
            out.points.push_back(*s.point);
        }
    }
    try {
        out.fit = fit_alpha(out.points);
    } catch (const Error& e) {
        out.fit_error = e.what();
    }
    return out;
}

}  // namespace linger
