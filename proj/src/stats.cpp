#include "linger/stats.hpp"

#include "linger/errors.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>

namespace linger {

void RunningStats::merge(const RunningStats& other) noexcept
{
    if (other.n_ == 0) {
        return;
    }
    if (n_ == 0) {
        *this = other;
        return;
    }
    const double n1 = static_cast<double>(n_);
    const double n2 = static_cast<double>(other.n_);
    const double d = other.mean_ - mean_;
    const double n = n1 + n2;
    mean_ += d * n2 / n;
    m2_ += other.m2_ + d * d * n1 * n2 / n;
    n_ += other.n_;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2) {
        throw EstimationError("line fit needs at least two paired points");
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
    if (sxx <= 0.0) {
        throw EstimationError("line fit needs at least two distinct abscissae");
    }
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - fit.intercept - fit.slope * x[i];
        fit.rss += r * r;
    }
    if (x.size() > 2) {
        const double s2 = fit.rss / (n - 2.0);
        fit.slope_stderr = std::sqrt(s2 / sxx);
        fit.intercept_stderr = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
    }
    return fit;
}

double propagated_slope_stderr(std::span<const double> x, std::span<const double> y_stderr)
{
    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    for (double v : x) {
        mx += v;
    }
    mx /= n;
    double sxx = 0.0;
    for (double v : x) {
        sxx += (v - mx) * (v - mx);
    }
    double var = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double c = (x[i] - mx) / sxx;
        var += c * c * y_stderr[i] * y_stderr[i];
    }
    return std::sqrt(var);
}

double student_t_critical(double alpha, double dof)
{
    boost::math::students_t dist(dof);
    return boost::math::quantile(boost::math::complement(dist, alpha / 2.0));
}

double ks_statistic(std::vector<double> a, std::vector<double> b)
{
    if (a.empty() || b.empty()) {
        throw EstimationError("KS statistic needs two non-empty samples");
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) {
            ++i;
        }
        while (j < b.size() && b[j] == v) {
            ++j;
        }
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double ks_critical(double alpha, std::size_t n, std::size_t m)
{
    const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
    const double nd = static_cast<double>(n);
    const double md = static_cast<double>(m);
    return c * std::sqrt((nd + md) / (nd * md));
}

}  // namespace linger
