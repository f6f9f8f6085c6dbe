#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace linger {

/// Welford accumulator.
class RunningStats {
public:
    void add(double x) noexcept
    {
        ++n_;
        const double d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }

    void merge(const RunningStats& other) noexcept;

    std::uint64_t count() const noexcept { return n_; }
    double mean() const noexcept { return mean_; }
    double variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    double stddev() const noexcept { return std::sqrt(variance()); }
    double stderr_of_mean() const noexcept { return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

private:
    std::uint64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

/// Ordinary least-squares line y = intercept + slope * x.
struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double rss = 0.0;
    double slope_stderr = 0.0;      // from residuals; 0 with two points
    double intercept_stderr = 0.0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Standard error of the OLS slope when each y_i carries an independent
/// standard error se_i (propagated, not residual based).
double propagated_slope_stderr(std::span<const double> x, std::span<const double> y_stderr);

/// Two-sided Student-t quantile t_{1-alpha/2, dof}.
double student_t_critical(double alpha, double dof);

/// Two-sample Kolmogorov-Smirnov statistic D.
double ks_statistic(std::vector<double> a, std::vector<double> b);

/// Asymptotic two-sample KS critical value at level alpha.
double ks_critical(double alpha, std::size_t n, std::size_t m);

}  // namespace linger
