#pragma once

#include "linger/rng.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace linger {

enum class DistributionKind { geometric, point_mass, bernoulli, poisson, zeta };

std::string_view kind_name(DistributionKind kind) noexcept;
DistributionKind parse_kind(std::string_view name);

/// Integer-valued law on {0, 1, ...}. Only the fields used by `kind` are read:
///   geometric   P(k) = p (1-p)^k            (p)
///   point-mass  P(c) = 1                    (c)
///   bernoulli   P(c) = p, P(0) = 1-p        (p, c)
///   poisson     mean lambda                 (lambda)
///   zeta        P(k) proportional to (k+1)^-s, s > 2   (s)
struct DistributionSpec {
    DistributionKind kind = DistributionKind::point_mass;
    double p = 1.0;
    double c = 0.0;
    double lambda = 0.0;
    double s = 0.0;

    static DistributionSpec geometric(double p) { return {DistributionKind::geometric, p, 0.0, 0.0, 0.0}; }
    static DistributionSpec point_mass(double c) { return {DistributionKind::point_mass, 1.0, c, 0.0, 0.0}; }
    static DistributionSpec bernoulli(double p, double c = 1.0) { return {DistributionKind::bernoulli, p, c, 0.0, 0.0}; }
    static DistributionSpec poisson(double lambda) { return {DistributionKind::poisson, 1.0, 0.0, lambda, 0.0}; }
    static DistributionSpec zeta(double s) { return {DistributionKind::zeta, 1.0, 0.0, 0.0, s}; }

    friend bool operator==(const DistributionSpec&, const DistributionSpec&) = default;
};

struct Moments {
    double mean;
    double variance;  // +inf when the second moment diverges
};

/// Geometric arrivals on {0, 1, ...} with success probability 2/(2+rho), so the
/// mean is rho/2 and the system load 2 E(xi) equals rho.
DistributionSpec geometric_xi_for_load(double rho);

/// Validated, immutable sampler for a DistributionSpec.
class Distribution {
public:
    explicit Distribution(const DistributionSpec& spec);

    const DistributionSpec& spec() const noexcept { return spec_; }
    Moments moments() const noexcept { return moments_; }
    double mean() const noexcept { return moments_.mean; }

    std::uint64_t sample(RngStream& rng) const;

    /// Sum of n independent draws, sampled directly where the family is closed
    /// under convolution (negative binomial, binomial, Poisson).
    std::uint64_t sample_sum(std::uint64_t n, RngStream& rng) const;

    /// Exact probability mass at k (used by goodness-of-fit checks).
    double pmf(std::uint64_t k) const;

private:
    static constexpr int kGeomTable = 48;

    std::uint64_t sample_geometric(RngStream& rng) const;
    std::uint64_t sample_poisson(RngStream& rng) const;
    std::uint64_t sample_zeta(RngStream& rng) const;

    DistributionSpec spec_;
    Moments moments_{};
    std::uint64_t c_int_ = 0;
    double log_q_ = 0.0;
    bool geom_table_ = false;
    std::array<double, kGeomTable + 1> geom_tail_{};
    double zeta_norm_ = 0.0;
};

}  // namespace linger
