#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fbnoma/approx.hpp"
#include "fbnoma/fbc.hpp"
#include "oracles.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace fbnoma;

namespace {
constexpr double kLn2 = std::numbers::ln2;

// Frozen from oracle::convexity_critical_constants (long double bisection).
constexpr double kX0 = 0.69043878547306;
constexpr double kBeta = 0.651140616699655;

// Centered second difference, the independent concavity probe.
template <class F>
double second_diff(F&& f, double x, double h) {
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}
} // namespace

TEST_CASE("boundary functions") {
    CHECK_THROWS_AS(approx::g(0.0), std::domain_error);
    CHECK_THROWS_AS(approx::g2(-1.0), std::domain_error);
    // both vanish towards the origin
    CHECK(approx::g(1e-10) < 1e-4);
    CHECK(approx::g2(1e-10) < 1e-4);
    for (double x = 1e-3; x <= 100.0; x *= 1.37)
        CHECK(approx::g1(x) >= approx::g(x));
    CHECK(approx::g2(0.6904) == doctest::Approx(approx::g(0.6904)).epsilon(1e-3));
    auto bv = approx::boundary_funcs(2.0);
    CHECK(bv.g == approx::g(2.0));
    CHECK(bv.g1 == approx::g1(2.0));
    CHECK(bv.g2 == approx::g2(2.0));
}

TEST_CASE("critical point") {
    const auto& cp = approx::critical_point();
    CHECK(std::abs(cp.x0 - 0.6904) < 5e-4);
    CHECK(cp.x0 == doctest::Approx(kX0).epsilon(1e-8));
    CHECK(cp.beta == doctest::Approx(kBeta).epsilon(1e-8));
    CHECK(approx::g2(cp.x0 / 2) < approx::g(cp.x0 / 2));
    CHECK(approx::g2(2 * cp.x0) > approx::g(2 * cp.x0));
    // cached: same object both times
    CHECK(&approx::critical_point() == &cp);
}

TEST_CASE("f_exact basics") {
    for (double x : {0.1, 1.0, 10.0})
        CHECK(approx::f_exact(x, 0.0) == doctest::Approx(std::log1p(x)));
    auto ctx = approx::ApproxContext::make(640.0, 1e-6);
    CHECK(std::abs(approx::f_exact(ctx.x_lo, ctx.a)) <= 1e-10);
}

TEST_CASE("context classification against the critical level") {
    // a above beta: strongly dispersed (small m, tiny eps)
    auto hi = approx::ApproxContext::make(49.0, 1e-6); // a = 4.753/7 = 0.679 > beta
    CHECK(!hi.has_convex_segment);
    auto lo = approx::ApproxContext::make(640.0, 1e-6);
    CHECK(lo.has_convex_segment);
    CHECK(lo.x_lo < lo.x_mid);
    // edges invert g and g2 at the dispersion level
    CHECK(approx::g(lo.x_lo) == doctest::Approx(lo.a).epsilon(1e-9));
    CHECK(approx::g2(lo.x_mid) == doctest::Approx(lo.a).epsilon(1e-9));
}

TEST_CASE("tangent lower bound and chord upper bound") {
    auto ctx = approx::ApproxContext::make(640.0, 1e-6);
    REQUIRE(ctx.has_convex_segment);
    CHECK(approx::f_lower(ctx.x_mid, ctx) == doctest::Approx(ctx.f_mid));
    CHECK(approx::f_upper(ctx.x_lo, ctx) == doctest::Approx(0.0));
    CHECK(approx::f_upper(ctx.x_mid, ctx) == doctest::Approx(ctx.f_mid));
    for (int i = 0; i <= 400; ++i) {
        double x = ctx.x_lo + (ctx.x_mid - ctx.x_lo) * i / 400.0;
        double fe = approx::f_exact(x, ctx.a);
        CHECK(approx::f_lower(x, ctx) <= fe + 1e-12);
        CHECK(approx::f_upper(x, ctx) >= fe - 1e-12);
    }
}

TEST_CASE("sandwich over the experiment grids") {
    for (double m : {100.0, 300.0, 640.0, 2000.0})
        for (double eps : {1e-3, 1e-6, 1e-9}) {
            auto ctx = approx::ApproxContext::make(m, eps);
            if (!ctx.has_convex_segment) continue;
            for (int i = 0; i <= 1000; ++i) {
                double x = ctx.x_lo + (ctx.x_mid - ctx.x_lo) * i / 1000.0;
                double fe = approx::f_exact(x, ctx.a);
                CHECK(approx::f_lower(x, ctx) <= fe + 1e-12);
                CHECK(approx::f_upper(x, ctx) >= fe - 1e-12);
            }
        }
}

TEST_CASE("largest lower-bound gap sits at the zero of the tangent") {
    auto ctx = approx::ApproxContext::make(640.0, 1e-6);
    REQUIRE(ctx.has_convex_segment);
    double zero_x = ctx.x_mid - ctx.f_mid / ctx.fprime_mid; // f_lower crosses 0 here
    REQUIRE(zero_x > ctx.x_lo);
    // on the rate-positive part [zero_x, x_mid] the gap decreases in x
    const int n = 500;
    double best_gap = -1.0;
    int best_i = -1;
    for (int i = 0; i <= n; ++i) {
        double x = zero_x + (ctx.x_mid - zero_x) * i / n;
        double gap = approx::f_exact(x, ctx.a) - approx::f_lower(x, ctx);
        if (gap > best_gap) {
            best_gap = gap;
            best_i = i;
        }
    }
    CHECK(best_i == 0);
}

TEST_CASE("f_modified is continuous, dominated by f, and concave") {
    std::mt19937_64 rng(777);
    for (double m : {100.0, 640.0, 2000.0})
        for (double eps : {1e-3, 1e-6}) {
            auto ctx = approx::ApproxContext::make(m, eps);
            if (ctx.has_convex_segment) {
                double left = approx::f_lower(ctx.x_mid - 1e-12, ctx);
                double right = approx::f_exact(ctx.x_mid + 1e-12, ctx.a);
                CHECK(left == doctest::Approx(right).epsilon(1e-9));
            }
            std::uniform_real_distribution<double> ux(ctx.x_lo, ctx.x_lo + 30.0);
            for (int trial = 0; trial < 400; ++trial) {
                double x = ux(rng);
                CHECK(approx::f_modified(x, ctx) <=
                      approx::f_exact(x, ctx.a) + 1e-12);
                // midpoint concavity across random pairs
                double y = ux(rng);
                double mid = 0.5 * (x + y);
                CHECK(approx::f_modified(mid, ctx) + 1e-10 >=
                      0.5 * (approx::f_modified(x, ctx) + approx::f_modified(y, ctx)));
            }
            CHECK_THROWS_AS(approx::f_modified(ctx.x_lo * 0.5 - 1e-6, ctx),
                            std::domain_error);
        }
}

TEST_CASE("convexity classification by second differences") {
    for (double m : {200.0, 640.0})
        for (double eps : {1e-6, 1e-9}) {
            auto ctx = approx::ApproxContext::make(m, eps);
            REQUIRE(ctx.has_convex_segment);
            auto f = [&](double x) { return approx::f_exact(x, ctx.a); };
            double margin = 1e-3;
            for (int i = 1; i < 40; ++i) {
                double x = ctx.x_lo + (ctx.x_mid - ctx.x_lo) * i / 40.0;
                if (x - ctx.x_lo < margin || ctx.x_mid - x < margin) continue;
                CHECK(second_diff(f, x, 1e-5) > 0.0); // convex segment
            }
            for (double x = ctx.x_mid + margin; x < ctx.x_mid + 20.0; x *= 1.3)
                CHECK(second_diff(f, x, 1e-5) < 0.0); // concave above
        }
    // a > beta: concave everywhere above the domain edge
    auto hi = approx::ApproxContext::make(49.0, 1e-6);
    REQUIRE(!hi.has_convex_segment);
    auto f = [&](double x) { return approx::f_exact(x, hi.a); };
    for (double x = hi.x_lo + 1e-3; x < hi.x_lo + 50.0; x *= 1.4)
        CHECK(second_diff(f, x, 1e-5) < 0.0);
}

TEST_CASE("closed-form derivatives match numeric differences") {
    auto ctx = approx::ApproxContext::make(640.0, 1e-6);
    for (double x : {0.1, 0.3, 0.7, 2.0, 9.0}) {
        double h = 1e-6 * (1.0 + x);
        double num1 = (approx::f_exact(x + h, ctx.a) - approx::f_exact(x - h, ctx.a)) /
                      (2.0 * h);
        CHECK(approx::f_prime(x, ctx.a) == doctest::Approx(num1).epsilon(1e-5));
        auto f = [&](double t) { return approx::f_exact(t, ctx.a); };
        CHECK(approx::f_second(x, ctx.a) ==
              doctest::Approx(second_diff(f, x, 1e-4 * (1.0 + x))).epsilon(1e-3));
    }
}

TEST_CASE("sinr_approx inverse map") {
    // Shannon degenerate: a = 0
    for (int n : {32, 256})
        for (double m : {100.0, 640.0}) {
            auto x = approx::sinr_approx(n, m, 0.5, 1e9);
            REQUIRE(x.has_value());
            CHECK(*x == doctest::Approx(std::exp2(n / m) - 1.0).epsilon(1e-9));
        }

    // upper-bounds the exact SINR map (equality on the concave branch)
    for (double m : {100.0, 300.0, 640.0, 2000.0})
        for (double eps : {1e-3, 1e-6, 1e-9})
            for (int n = 8; n <= 512; n *= 2) {
                fbc::FbcParams p(n, eps);
                auto exact = fbc::sinr_for_blocklength(m, p);
                auto sur = approx::sinr_approx(n, m, eps, 1e12);
                REQUIRE(exact.has_value());
                REQUIRE(sur.has_value());
                CHECK(*sur >= *exact - 1e-9 * (1.0 + *exact));
            }

    // surrogate rate is achievable: plugging the surrogate SINR into the
    // exact rate meets or exceeds the demand
    for (int n : {16, 64, 200}) {
        auto sur = approx::sinr_approx(n, 640.0, 1e-6, 1e12);
        REQUIRE(sur.has_value());
        CHECK(fbc::fbc_rate(*sur, 640.0, 1e-6) >= n / 640.0 - 1e-9);
    }

    // infeasible demand under a small cap
    CHECK(!approx::sinr_approx(256, 640.0, 1e-6, 0.1).has_value());
}

TEST_CASE("sinr_approx is midpoint-convex and increasing in bits") {
    std::mt19937_64 rng(4242);
    std::uniform_int_distribution<int> un(8, 400);
    std::uniform_int_distribution<int> uk(1, 50);
    for (double m : {300.0, 640.0}) {
        for (int trial = 0; trial < 200; ++trial) {
            int n = un(rng);
            int k = uk(rng);
            auto lo = approx::sinr_approx(std::max(1, n - k), m, 1e-6, 1e12);
            auto mid = approx::sinr_approx(n, m, 1e-6, 1e12);
            auto hi = approx::sinr_approx(n + k, m, 1e-6, 1e12);
            REQUIRE(lo.has_value());
            REQUIRE(mid.has_value());
            REQUIRE(hi.has_value());
            if (n - k >= 1) {
                CHECK(*lo + *hi >= 2.0 * *mid - 1e-10);
                CHECK(*hi > *lo);
            }
        }
    }
}
