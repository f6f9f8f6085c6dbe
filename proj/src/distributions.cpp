#include "linger/distributions.hpp"

#include "linger/errors.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace linger {

namespace {

bool is_nonneg_integer(double c)
{
    return std::isfinite(c) && c >= 0.0 && std::floor(c) == c && c < 0x1.0p53;
}

std::uint64_t poisson_draw(double mean, RngStream& rng)
{
    if (mean <= 0.0) {
        return 0;
    }
    if (mean <= 30.0) {
        const double u = rng.uniform();
        double pk = std::exp(-mean);
        double cdf = pk;
        std::uint64_t k = 0;
        while (u > cdf && k < 1000) {
            ++k;
            pk *= mean / static_cast<double>(k);
            cdf += pk;
        }
        return k;
    }
    std::poisson_distribution<std::uint64_t> dist(mean);
    return dist(rng);
}

}  // namespace

std::string_view kind_name(DistributionKind kind) noexcept
{
    switch (kind) {
    case DistributionKind::geometric: return "geometric";
    case DistributionKind::point_mass: return "point-mass";
    case DistributionKind::bernoulli: return "bernoulli";
    case DistributionKind::poisson: return "poisson";
    case DistributionKind::zeta: return "zeta";
    }
    return "unknown";
}

DistributionKind parse_kind(std::string_view name)
{
    for (auto kind : {DistributionKind::geometric, DistributionKind::point_mass, DistributionKind::bernoulli,
                      DistributionKind::poisson, DistributionKind::zeta}) {
        if (kind_name(kind) == name) {
            return kind;
        }
    }
    throw ParameterError("unknown distribution kind '" + std::string(name) + "'");
}

DistributionSpec geometric_xi_for_load(double rho)
{
    if (!(rho > 0.0 && rho < 2.0)) {
        throw ParameterError("load rho must lie in (0, 2), got " + std::to_string(rho));
    }
    return DistributionSpec::geometric(2.0 / (2.0 + rho));
}

Distribution::Distribution(const DistributionSpec& spec) : spec_(spec)
{
    switch (spec.kind) {
    case DistributionKind::geometric: {
        if (!(spec.p > 0.0 && spec.p <= 1.0)) {
            throw ParameterError("geometric: p must lie in (0, 1]");
        }
        const double q = 1.0 - spec.p;
        moments_ = {q / spec.p, q / (spec.p * spec.p)};
        log_q_ = q > 0.0 ? std::log(q) : -std::numeric_limits<double>::infinity();
        // Sequential inversion beats a log() when most mass sits on a few values.
        geom_table_ = q <= 0.75;
        double tail = 1.0;
        for (auto& t : geom_tail_) {
            t = tail;
            tail *= q;
        }
        break;
    }
    case DistributionKind::point_mass:
        if (!is_nonneg_integer(spec.c)) {
            throw ParameterError("point-mass: c must be a non-negative integer");
        }
        c_int_ = static_cast<std::uint64_t>(spec.c);
        moments_ = {spec.c, 0.0};
        break;
    case DistributionKind::bernoulli:
        if (!(spec.p >= 0.0 && spec.p <= 1.0)) {
            throw ParameterError("bernoulli: p must lie in [0, 1]");
        }
        if (!is_nonneg_integer(spec.c)) {
            throw ParameterError("bernoulli: c must be a non-negative integer");
        }
        c_int_ = static_cast<std::uint64_t>(spec.c);
        moments_ = {spec.c * spec.p, spec.c * spec.c * spec.p * (1.0 - spec.p)};
        break;
    case DistributionKind::poisson:
        if (!(spec.lambda >= 0.0 && std::isfinite(spec.lambda))) {
            throw ParameterError("poisson: lambda must be finite and >= 0");
        }
        moments_ = {spec.lambda, spec.lambda};
        break;
    case DistributionKind::zeta: {
        if (!(spec.s > 2.0 && std::isfinite(spec.s))) {
            throw ParameterError("zeta: s must exceed 2 for a finite mean");
        }
        zeta_norm_ = std::riemann_zeta(spec.s);
        const double m1 = std::riemann_zeta(spec.s - 1.0) / zeta_norm_;
        const double var = spec.s > 3.0 ? std::riemann_zeta(spec.s - 2.0) / zeta_norm_ - m1 * m1
                                        : std::numeric_limits<double>::infinity();
        moments_ = {m1 - 1.0, var};
        break;
    }
    }
}

std::uint64_t Distribution::sample(RngStream& rng) const
{
    switch (spec_.kind) {
    case DistributionKind::geometric: return sample_geometric(rng);
    case DistributionKind::point_mass: return c_int_;
    case DistributionKind::bernoulli: return rng.uniform() < spec_.p ? c_int_ : 0;
    case DistributionKind::poisson: return sample_poisson(rng);
    case DistributionKind::zeta: return sample_zeta(rng);
    }
    return 0;
}

std::uint64_t Distribution::sample_geometric(RngStream& rng) const
{
    if (spec_.p >= 1.0) {
        return 0;
    }
    // P(X >= k) = q^k = geom_tail_[k]; u uniform on (0, 1].
    const double u = rng.uniform_pos();
    if (geom_table_) {
        std::uint64_t k = 0;
        while (k < kGeomTable && u <= geom_tail_[k + 1]) {
            ++k;
        }
        if (k < kGeomTable) {
            return k;
        }
        // Memoryless past the table.
        return kGeomTable + static_cast<std::uint64_t>(std::floor(std::log(rng.uniform_pos()) / log_q_));
    }
    return static_cast<std::uint64_t>(std::floor(std::log(u) / log_q_));
}

std::uint64_t Distribution::sample_poisson(RngStream& rng) const
{
    return poisson_draw(spec_.lambda, rng);
}

std::uint64_t Distribution::sample_zeta(RngStream& rng) const
{
    // Devroye's rejection sampler for the Zipf law on {1, 2, ...}, shifted to 0.
    const double a = spec_.s;
    const double b = std::pow(2.0, a - 1.0);
    for (;;) {
        const double u = rng.uniform_pos();
        const double v = rng.uniform();
        const double x = std::floor(std::pow(u, -1.0 / (a - 1.0)));
        if (!(x < 0x1.0p62)) {
            continue;
        }
        const double t = std::pow(1.0 + 1.0 / x, a - 1.0);
        if (v * x * (t - 1.0) / (b - 1.0) <= t / b) {
            return static_cast<std::uint64_t>(x) - 1;
        }
    }
}

std::uint64_t Distribution::sample_sum(std::uint64_t n, RngStream& rng) const
{
    if (n == 0) {
        return 0;
    }
    switch (spec_.kind) {
    case DistributionKind::point_mass: return n * c_int_;
    case DistributionKind::bernoulli: {
        if (spec_.p <= 0.0 || c_int_ == 0) {
            return 0;
        }
        std::binomial_distribution<std::uint64_t> dist(n, spec_.p);
        return c_int_ * dist(rng);
    }
    case DistributionKind::poisson: return poisson_draw(spec_.lambda * static_cast<double>(n), rng);
    case DistributionKind::geometric: {
        if (spec_.p >= 1.0) {
            return 0;
        }
        if (n <= 8) {
            break;
        }
        // Negative binomial as a gamma mixture of Poissons.
        std::gamma_distribution<double> gamma(static_cast<double>(n), (1.0 - spec_.p) / spec_.p);
        return poisson_draw(gamma(rng), rng);
    }
    case DistributionKind::zeta: break;
    }
    std::uint64_t total = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
        total += sample(rng);
    }
    return total;
}

double Distribution::pmf(std::uint64_t k) const
{
    const double kd = static_cast<double>(k);
    switch (spec_.kind) {
    case DistributionKind::geometric: return spec_.p * std::pow(1.0 - spec_.p, kd);
    case DistributionKind::point_mass: return k == c_int_ ? 1.0 : 0.0;
    case DistributionKind::bernoulli:
        if (c_int_ == 0) {
            return k == 0 ? 1.0 : 0.0;
        }
        return k == c_int_ ? spec_.p : (k == 0 ? 1.0 - spec_.p : 0.0);
    case DistributionKind::poisson:
        if (spec_.lambda == 0.0) {
            return k == 0 ? 1.0 : 0.0;
        }
        return std::exp(kd * std::log(spec_.lambda) - spec_.lambda - std::lgamma(kd + 1.0));
    case DistributionKind::zeta: return std::pow(kd + 1.0, -spec_.s) / zeta_norm_;
    }
    return 0.0;
}

}  // namespace linger
