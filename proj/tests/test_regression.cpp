#include "linger/regression.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace linger;

namespace {

std::vector<SweepPoint> on_curve(double a, double b, const std::vector<double>& rho)
{
    std::vector<SweepPoint> pts;
    for (double r : rho) {
        SweepPoint p;
        p.rho = r;
        p.F = a + b / p.x();
        pts.push_back(p);
    }
    return pts;
}

std::vector<double> rho_of_x(const std::vector<double>& xs)
{
    std::vector<double> rho;
    for (double x : xs) {
        rho.push_back(1.0 - std::exp(-x));
    }
    return rho;
}

// Decreases down to index `min_at`, then follows 2 - 0.8/x.
std::vector<SweepPoint> v_shaped(std::size_t min_at)
{
    auto pts = on_curve(2.0, -0.8, rho_grid_for_x());
    for (std::size_t i = 0; i < min_at; ++i) {
        pts[i].F = pts[min_at].F + 0.05 * double(min_at - i);
    }
    return pts;
}

}  // namespace

TEST_SUITE("regression") {

TEST_CASE("exact fit on a + b/x")
{
    const RegressionResult r = fit_alpha(on_curve(2.0, -0.8, rho_grid_for_x()));
    CHECK(r.alpha_hat == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.log_c_hat == doctest::Approx(-0.8).epsilon(1e-12));
    CHECK(r.rss < 1e-24);
    CHECK(r.window_start == 0);
    CHECK(r.n_fitted == 10);
}

TEST_CASE("exact fit for random (a, b)")
{
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> ua(0.5, 10.0);
    std::uniform_real_distribution<double> ub(-3.0, -0.01);
    for (int i = 0; i < 100; ++i) {
        const double a = ua(gen);
        const double b = ub(gen);
        const RegressionResult r = fit_alpha(on_curve(a, b, rho_grid_for_x(1.0, 7.0, 12)));
        REQUIRE(r.alpha_hat == doctest::Approx(a).epsilon(1e-10));
        REQUIRE(r.log_c_hat == doctest::Approx(b).epsilon(1e-10));
        REQUIRE(r.rss >= 0.0);
        REQUIRE(r.rss < 1e-20);
    }
}

TEST_CASE("regression curve of the alpha(2) figure")
{
    // Points of the dashed regression curve of the F(rho, 2) figure.
    const std::vector<double> xs{2.014903, 2.420368, 2.825833, 3.231298, 3.636763, 4.042229, 4.447694,
                                 4.853159, 5.258624, 5.664089, 6.069554, 6.475019, 6.880484, 7.285949,
                                 7.691415, 8.096880, 8.502345, 8.907810, 9.313275, 9.718740};
    const std::vector<double> fs{1.610193, 1.675226, 1.721597, 1.756330, 1.783319, 1.804893, 1.822534,
                                 1.837227, 1.849654, 1.860302, 1.869527, 1.877597, 1.884716, 1.891043,
                                 1.896702, 1.901795, 1.906402, 1.910589, 1.914412, 1.917916};
    std::vector<SweepPoint> pts;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        SweepPoint p;
        p.rho = 1.0 - std::exp(-xs[i]);
        p.F = fs[i];
        pts.push_back(p);
    }
    const RegressionResult r = fit_alpha(pts);
    CHECK(r.alpha_hat == doctest::Approx(1.9984).epsilon(2e-4));
    CHECK(r.window_start == 0);
}

TEST_CASE("the fit does not depend on input order")
{
    auto pts = v_shaped(2);
    for (auto& p : pts) {
        p.F += 0.01 * std::sin(50 * p.rho);
    }
    const RegressionResult ref = fit_alpha(pts);
    std::mt19937_64 gen(3);
    for (int i = 0; i < 20; ++i) {
        std::shuffle(pts.begin(), pts.end(), gen);
        const RegressionResult r = fit_alpha(pts);
        REQUIRE(r.alpha_hat == doctest::Approx(ref.alpha_hat).epsilon(1e-13));
        REQUIRE(r.window_start == ref.window_start);
    }
}

TEST_CASE("window starts at the constructed minimum")
{
    for (std::size_t m : {1u, 3u, 5u, 6u}) {
        const RegressionResult r = fit_alpha(v_shaped(m));
        CAPTURE(m);
        CHECK(r.window_start == m);
        CHECK(r.n_fitted == 10 - m);
        CHECK(r.alpha_hat == doctest::Approx(2.0).epsilon(1e-10));
    }
}

TEST_CASE("the minimum rule is active on non-monotone data")
{
    const auto pts = v_shaped(4);
    const RegressionResult windowed = fit_alpha(pts);
    const RegressionResult all = fit_alpha_all_points(pts);
    CHECK(windowed.alpha_hat == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(std::abs(all.alpha_hat - windowed.alpha_hat) > 0.05);
}

TEST_CASE("ties go to the largest index")
{
    auto pts = on_curve(2.0, -0.8, rho_grid_for_x());
    const double low = pts[0].F - 1.0;
    pts[2].F = low;
    pts[4].F = low;
    CHECK(fit_alpha(pts).window_start == 4);
}

TEST_CASE("window and size errors")
{
    CHECK_THROWS_AS(fit_alpha(on_curve(2.0, -0.8, rho_grid_for_x(2.0, 5.3, 5))), ParameterError);
    CHECK_THROWS_AS(fit_alpha(v_shaped(7)), InsufficientWindowError);
    CHECK_THROWS_AS(fit_alpha(v_shaped(8)), InsufficientWindowError);
}

TEST_CASE("F decreasing over the whole sweep is fitted on every point")
{
    const RegressionResult r = fit_alpha(on_curve(3.3, 1.4, rho_grid_for_x()));
    CHECK(r.window_start == 0);
    CHECK(r.n_fitted == 10);
    CHECK(r.alpha_hat == doctest::Approx(3.3).epsilon(1e-12));
}

TEST_CASE("default load grid")
{
    const auto g = rho_grid_for_x();
    REQUIRE(g.size() == 10);
    CHECK(std::log(1 / (1 - g.front())) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(std::log(1 / (1 - g.back())) == doctest::Approx(5.3).epsilon(1e-12));
    CHECK(g.front() == doctest::Approx(0.8647).epsilon(1e-4));
    CHECK(g.back() == doctest::Approx(0.99501).epsilon(1e-5));
    CHECK(std::is_sorted(g.begin(), g.end()));
    CHECK_THROWS_AS(rho_grid_for_x(2.0, 1.0, 10), ParameterError);
}

TEST_CASE("sweep runs are independent of the worker count")
{
    SweepOptions opt;
    opt.rho_grid = rho_grid_for_x(1.0, 2.5, 6);
    opt.epochs_per_point = 3000;
    opt.seed = 5;
    opt.workers = 1;
    const SweepOutcome a = sweep_alpha(opt);
    opt.workers = 3;
    const SweepOutcome b = sweep_alpha(opt);
    REQUIRE(a.points.size() == 6);
    REQUIRE(b.points.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(a.points[i].mean == b.points[i].mean);
        CHECK(a.points[i].F == b.points[i].F);
        CHECK(a.points[i].ci == b.points[i].ci);
    }
    REQUIRE(a.fit.has_value() == b.fit.has_value());
}

TEST_CASE("point failures are recorded and the sweep continues")
{
    SweepOptions opt;
    opt.rho_grid = {0.3, 0.5, 0.98};
    opt.epochs_per_point = 200;
    opt.max_slots = 2000;  // too small for rho = 0.98 cycles
    const SweepOutcome out = sweep_alpha(opt);
    REQUIRE(out.statuses.size() == 3);
    CHECK(out.statuses[0].point.has_value());
    CHECK(out.statuses[1].point.has_value());
    CHECK_FALSE(out.statuses[2].point.has_value());
    CHECK(out.statuses[2].error.find("rho=0.98") != std::string::npos);
    CHECK_FALSE(out.fit.has_value());
    CHECK_FALSE(out.fit_error.empty());

    opt.rho_grid = {0.5, 0.4};
    CHECK_THROWS_AS(sweep_alpha(opt), ParameterError);
}

}
