#include "linger/distributions.hpp"
#include "linger/io.hpp"
#include "linger/parallel.hpp"
#include "linger/rng.hpp"
#include "linger/stats.hpp"

#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <vector>

using namespace linger;

TEST_SUITE("distributions") {

TEST_CASE("philox known answers")
{
    // Random123 known-answer vectors for philox4x32-10.
    CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) ==
          std::array<std::uint32_t, 4>{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          std::array<std::uint32_t, 4>{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          std::array<std::uint32_t, 4>{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and distinct")
{
    RngStream a(42, 7);
    RngStream b(42, 7);
    RngStream c(42, 8);
    RngStream d(43, 7);
    int same_c = 0;
    int same_d = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto x = a();
        REQUIRE(x == b());
        same_c += x == c() ? 1 : 0;
        same_d += x == d() ? 1 : 0;
    }
    CHECK(same_c == 0);
    CHECK(same_d == 0);
    CHECK(derive_stream_id(1, 2) != derive_stream_id(2, 1));
    CHECK(a.child(3).stream_id() == derive_stream_id(7, 3));

    RngStream u(1, 1);
    for (int i = 0; i < 10000; ++i) {
        const double v = u.uniform();
        REQUIRE(v >= 0.0);
        REQUIRE(v < 1.0);
        const double w = u.uniform_pos();
        REQUIRE(w > 0.0);
        REQUIRE(w <= 1.0);
    }
}

TEST_CASE("geometric_xi_for_load")
{
    const DistributionSpec d = geometric_xi_for_load(0.99);
    CHECK(d.kind == DistributionKind::geometric);
    CHECK(d.p == doctest::Approx(2.0 / 2.99).epsilon(1e-15));
    CHECK(Distribution(d).mean() == doctest::Approx(0.495).epsilon(1e-14));
    CHECK(Distribution(geometric_xi_for_load(1.0)).mean() == doctest::Approx(0.5).epsilon(1e-15));
    for (double rho : {0.1, 0.5, 0.87, 1.3, 1.99}) {
        CHECK(Distribution(geometric_xi_for_load(rho)).mean() == doctest::Approx(rho / 2).epsilon(1e-13));
    }
    CHECK_THROWS_AS(geometric_xi_for_load(0.0), ParameterError);
    CHECK_THROWS_AS(geometric_xi_for_load(2.0), ParameterError);
    CHECK_THROWS_AS(geometric_xi_for_load(-1.0), ParameterError);
}

TEST_CASE("empirical mean and variance at rho = 0.99")
{
    const Distribution d(geometric_xi_for_load(0.99));
    RngStream rng(2024, 1);
    RunningStats s;
    RunningStats sq;
    const int n = 1'000'000;
    std::vector<double> draws(n);
    for (auto& v : draws) {
        v = static_cast<double>(d.sample(rng));
        s.add(v);
    }
    CHECK(std::abs(s.mean() - 0.495) <= 3 * s.stderr_of_mean());
    // Standard error of the sample variance from the fourth central moment.
    for (double v : draws) {
        sq.add((v - s.mean()) * (v - s.mean()));
    }
    const double var = d.moments().variance;
    CHECK(std::abs(s.variance() - var) <= 3 * sq.stderr_of_mean());
}

TEST_CASE("trivial draws")
{
    RngStream rng(1, 1);
    const Distribution one(DistributionSpec::point_mass(1));
    const Distribution sure_zero(DistributionSpec::geometric(1.0));
    for (int i = 0; i < 1000; ++i) {
        REQUIRE(one.sample(rng) == 1);
        REQUIRE(sure_zero.sample(rng) == 0);
    }
    CHECK(one.sample_sum(17, rng) == 17);
    CHECK(sure_zero.sample_sum(1000, rng) == 0);
}

TEST_CASE("chi-square goodness of fit for geometric(2/3)")
{
    const double p = 2.0 / 3.0;
    const Distribution d(DistributionSpec::geometric(p));
    RngStream rng(99, 5);
    const int n = 100'000;
    const int cells = 10;  // 0..8 and a tail cell
    std::vector<double> observed(cells, 0.0);
    for (int i = 0; i < n; ++i) {
        observed[std::min<std::uint64_t>(d.sample(rng), cells - 1)] += 1;
    }
    double chi2 = 0.0;
    double tail = 1.0;
    for (int k = 0; k < cells; ++k) {
        const double prob = k < cells - 1 ? p * std::pow(1 - p, k) : tail;
        tail -= prob;
        const double expected = n * prob;
        chi2 += (observed[k] - expected) * (observed[k] - expected) / expected;
    }
    const boost::math::chi_squared law(cells - 1);
    CHECK(chi2 < boost::math::quantile(law, 0.99));
}

TEST_CASE("closed-form moments")
{
    CHECK(Distribution(DistributionSpec::point_mass(3)).moments().mean == 3);
    CHECK(Distribution(DistributionSpec::point_mass(3)).moments().variance == 0);
    const Moments g = Distribution(DistributionSpec::geometric(0.25)).moments();
    CHECK(g.mean == doctest::Approx(3.0));
    CHECK(g.variance == doctest::Approx(12.0));
    const Moments po = Distribution(DistributionSpec::poisson(2.5)).moments();
    CHECK(po.mean == doctest::Approx(2.5));
    CHECK(po.variance == doctest::Approx(2.5));
    const Moments be = Distribution(DistributionSpec::bernoulli(0.3, 2)).moments();
    CHECK(be.mean == doctest::Approx(0.6));
    CHECK(be.variance == doctest::Approx(4 * 0.3 * 0.7));

    // Zeta law P(k) ~ (k+1)^-s against direct summation.
    for (double s : {3.5, 4.0, 6.0}) {
        double z = 0.0;
        double m1 = 0.0;
        double m2 = 0.0;
        const int n = 2'000'000;
        for (int k = 0; k < n; ++k) {
            const double w = std::pow(k + 1.0, -s);
            z += w;
            m1 += k * w;
            m2 += double(k) * k * w;
        }
        // Integral estimate of the truncated tails, sum_{k>=n} k^j (k+1)^-s.
        auto tail = [&](double j) { return std::pow(double(n), j - s + 1) / (s - j - 1); };
        z += tail(0);
        m1 += tail(1);
        m2 += tail(2);
        const Moments mz = Distribution(DistributionSpec::zeta(s)).moments();
        CHECK(mz.mean == doctest::Approx(m1 / z).epsilon(1e-6));
        CHECK(mz.variance == doctest::Approx(m2 / z - (m1 / z) * (m1 / z)).epsilon(1e-4));
    }
    CHECK(std::isinf(Distribution(DistributionSpec::zeta(2.5)).moments().variance));
}

TEST_CASE("pmf sums to one")
{
    for (const auto& spec : {DistributionSpec::geometric(0.4), DistributionSpec::poisson(3.0),
                             DistributionSpec::bernoulli(0.2, 3), DistributionSpec::point_mass(2),
                             DistributionSpec::zeta(5.0)}) {
        const Distribution d(spec);
        double total = 0.0;
        for (std::uint64_t k = 0; k < 200'000; ++k) {
            total += d.pmf(k);
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("invalid specs are rejected")
{
    CHECK_THROWS_AS(Distribution(DistributionSpec::geometric(0.0)), ParameterError);
    CHECK_THROWS_AS(Distribution(DistributionSpec::geometric(1.5)), ParameterError);
    CHECK_THROWS_AS(Distribution(DistributionSpec::point_mass(1.5)), ParameterError);
    CHECK_THROWS_AS(Distribution(DistributionSpec::point_mass(-1)), ParameterError);
    CHECK_THROWS_AS(Distribution(DistributionSpec::bernoulli(1.2)), ParameterError);
    CHECK_THROWS_AS(Distribution(DistributionSpec::poisson(-0.5)), ParameterError);
    CHECK_THROWS_AS(Distribution(DistributionSpec::zeta(2.0)), ParameterError);
    CHECK_THROWS_AS(parse_kind("pareto"), ParameterError);
}

TEST_CASE("empirical means over 50 seeds")
{
    const std::vector<DistributionSpec> specs{
        DistributionSpec::geometric(0.6689), DistributionSpec::point_mass(2), DistributionSpec::bernoulli(0.3, 2),
        DistributionSpec::poisson(1.7), DistributionSpec::zeta(4.5)};
    const int n = 10'000;
    for (const auto& spec : specs) {
        const Distribution d(spec);
        const Moments m = d.moments();
        int within = 0;
        for (std::uint64_t seed = 1; seed <= 50; ++seed) {
            RngStream rng(seed, 11);
            double sum = 0.0;
            for (int i = 0; i < n; ++i) {
                sum += static_cast<double>(d.sample(rng));
            }
            within += std::abs(sum / n - m.mean) <= 4 * std::sqrt(m.variance / n) ? 1 : 0;
        }
        CAPTURE(kind_name(spec.kind));
        CHECK(within >= 50);  // at least 99% of 50 runs
    }
}

TEST_CASE("sample_sum has the law of a sum of draws")
{
    for (const auto& spec : {geometric_xi_for_load(0.9), DistributionSpec::poisson(0.45),
                             DistributionSpec::bernoulli(0.45), DistributionSpec::zeta(4.0)}) {
        const Distribution d(spec);
        for (std::uint64_t n : {3ULL, 40ULL, 500ULL}) {
            RngStream a(5, 1);
            RngStream b(5, 2);
            std::vector<double> summed;
            std::vector<double> looped;
            for (int i = 0; i < 4000; ++i) {
                summed.push_back(static_cast<double>(d.sample_sum(n, a)));
                std::uint64_t s = 0;
                for (std::uint64_t j = 0; j < n; ++j) {
                    s += d.sample(b);
                }
                looped.push_back(static_cast<double>(s));
            }
            CAPTURE(kind_name(spec.kind));
            CAPTURE(n);
            CHECK(ks_statistic(summed, looped) < ks_critical(0.01, summed.size(), looped.size()));
        }
    }
}

TEST_CASE("draws do not depend on the worker count")
{
    const Distribution d(geometric_xi_for_load(0.99));
    auto job = [&](std::size_t i) {
        RngStream rng(77, derive_stream_id(1, i));
        std::uint64_t s = 0;
        for (int k = 0; k < 1000; ++k) {
            s = s * 31 + d.sample(rng);
        }
        return s;
    };
    CHECK(parallel_map(16, 1, job) == parallel_map(16, 4, job));
}

TEST_CASE("config round trip")
{
    for (const auto& spec : {DistributionSpec::geometric(0.6689), DistributionSpec::point_mass(1),
                             DistributionSpec::bernoulli(0.25, 3), DistributionSpec::poisson(1.25),
                             DistributionSpec::zeta(3.5), geometric_xi_for_load(0.99)}) {
        const std::string text = to_json(spec).dump();
        CHECK(distribution_from_json(json::parse(text), "xi") == spec);
    }
    CHECK(to_json(DistributionSpec::geometric(0.6689)).dump() == R"({"kind":"geometric","p":0.6689})");
    CHECK_THROWS_AS(distribution_from_json(json::parse(R"({"kind":"geometric"})"), "model.xi"), ConfigError);
    CHECK_THROWS_WITH_AS(distribution_from_json(json::parse(R"({"kind":"geometric","p":2})"), "model.xi"),
                         doctest::Contains("model.xi"), ConfigError);
}

}
