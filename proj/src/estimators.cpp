#include "linger/estimators.hpp"

#include "linger/errors.hpp"
#include "linger/stats.hpp"

#include <algorithm>
#include <cmath>

namespace linger {

namespace {

// Mean and standard error of the mean from non-overlapping batches; the
// remainder that does not fill a batch is left out of the error estimate.
std::pair<double, double> batch_mean_stderr(std::span<const double> values, int n_batches)
{
    const std::size_t size = values.size() / static_cast<std::size_t>(n_batches);
    RunningStats batches;
    for (int b = 0; b < n_batches; ++b) {
        double s = 0.0;
        for (std::size_t i = 0; i < size; ++i) {
            s += values[static_cast<std::size_t>(b) * size + i];
        }
        batches.add(s / static_cast<double>(size));
    }
    double total = 0.0;
    for (double v : values) {
        total += v;
    }
    return {total / static_cast<double>(values.size()), batches.stderr_of_mean()};
}

void check_batches(std::size_t n_used, std::uint64_t burn_in, std::size_t n_total, int n_batches)
{
    if (n_batches < 10) {
        throw EstimationError("batch means need at least 10 batches");
    }
    if (n_total <= burn_in) {
        throw EstimationError("stream of " + std::to_string(n_total) + " epochs does not exceed burn-in " +
                              std::to_string(burn_in));
    }
    if (n_used < static_cast<std::size_t>(n_batches)) {
        throw EstimationError("fewer post-burn-in epochs than batches");
    }
}

}  // namespace

EstimatorResult stationary_mean(std::span<const double> values, std::uint64_t burn_in, int n_batches)
{
    const std::size_t used = values.size() > burn_in ? values.size() - burn_in : 0;
    check_batches(used, burn_in, values.size(), n_batches);
    const auto [mean, se] = batch_mean_stderr(values.subspan(burn_in), n_batches);
    EstimatorResult out;
    out.mean = mean;
    out.ci_half_width = student_t_critical(0.05, n_batches - 1) * se;
    out.n_epochs = values.size();
    out.burn_in = burn_in;
    out.n_batches = n_batches;
    return out;
}

double scaling_F(double mean, double rho)
{
    if (!(mean > 0.0) || !(rho > 0.0 && rho < 1.0)) {
        throw ParameterError("scaling_F needs mean > 0 and rho in (0, 1)");
    }
    return std::log(mean) / std::log(1.0 / (1.0 - rho));
}

std::optional<double> growth_rate(std::span<const double> trajectory)
{
    if (trajectory.size() < 4) {
        throw EstimationError("growth rate needs at least four epochs");
    }
    const auto tail = trajectory.subspan(trajectory.size() / 2);
    if (std::any_of(tail.begin(), tail.end(), [](double v) { return v <= 0.0; })) {
        return std::nullopt;
    }
    // Geometric mean of successive ratios telescopes to the end points.
    const double steps = static_cast<double>(tail.size() - 1);
    return std::exp((std::log(tail.back()) - std::log(tail.front())) / steps);
}

std::optional<double> growth_rate_above(std::span<const double> trajectory, double threshold)
{
    const auto it = std::find_if(trajectory.begin(), trajectory.end(), [&](double v) { return v > threshold; });
    if (it == trajectory.end()) {
        return std::nullopt;
    }
    return growth_rate(trajectory.subspan(static_cast<std::size_t>(it - trajectory.begin())));
}

void LingeringAccumulator::add(const CycleRecord& record)
{
    ++n_;
    const double t_star = static_cast<double>(record.t_star);
    sum_t_star_ += t_star;
    slots_ += t_star;
    if (record.tau_max) {
        ++n_tau_max_;
        sum_tau_max_ += static_cast<double>(*record.tau_max);
        sum_gap_max_ += t_star - static_cast<double>(*record.tau_max);
    }
    if (const auto first = record.first_emptied()) {
        ++n_tau_min_;
        sum_gap_min_ += t_star - static_cast<double>(*record.tau[static_cast<std::size_t>(*first)]);
        idle_ += static_cast<double>(record.idle_slots[static_cast<std::size_t>(*first)]);
    }
}

LingeringStats LingeringAccumulator::result() const
{
    if (n_ == 0) {
        throw EstimationError("lingering statistics need at least one cycle");
    }
    LingeringStats s;
    s.n_cycles = n_;
    s.mean_t_star = sum_t_star_ / static_cast<double>(n_);
    if (n_tau_max_ > 0) {
        s.mean_tau_max = sum_tau_max_ / static_cast<double>(n_tau_max_);
        s.mean_gap_t_star_tau_max = sum_gap_max_ / static_cast<double>(n_tau_max_);
    }
    if (n_tau_min_ > 0) {
        s.mean_gap_t_star_tau_min = sum_gap_min_ / static_cast<double>(n_tau_min_);
    }
    s.idle_fraction = slots_ > 0.0 ? idle_ / slots_ : 0.0;
    return s;
}

LingeringStats lingering_stats(std::span<const CycleRecord> records)
{
    LingeringAccumulator acc;
    for (const auto& r : records) {
        acc.add(r);
    }
    return acc.result();
}

StationarityCheck check_stationarity_identity(std::span<const double> active_totals, std::span<const double> t_stars,
                                              int R, double mean_xi, std::uint64_t burn_in, int n_batches)
{
    if (active_totals.empty()) {
        throw EstimationError("stationarity check needs epochs");
    }
    const std::size_t n_pairs = std::min(t_stars.size(), active_totals.size() - 1);
    const std::size_t used = n_pairs > burn_in ? n_pairs - burn_in : 0;
    check_batches(used, burn_in, n_pairs, n_batches);

    std::vector<double> lhs(used);
    std::vector<double> rhs(used);
    std::vector<double> diff(used);
    for (std::size_t i = 0; i < used; ++i) {
        const std::size_t k = burn_in + i;
        lhs[i] = active_totals[k + 1] / static_cast<double>(R);
        rhs[i] = mean_xi * t_stars[k];
        diff[i] = lhs[i] - rhs[i];
    }
    StationarityCheck out;
    out.lhs = batch_mean_stderr(lhs, n_batches).first;
    out.rhs = batch_mean_stderr(rhs, n_batches).first;
    const auto [d, se] = batch_mean_stderr(diff, n_batches);
    out.stderr = se;
    out.z_score = se > 0.0 ? d / se : (d == 0.0 ? 0.0 : std::copysign(INFINITY, d));
    out.lhs_total = out.lhs * R;
    out.rhs_total = out.rhs * R;
    return out;
}

}  // namespace linger
