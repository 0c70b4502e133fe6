#include "fbnoma/approx.hpp"

#include "fbnoma/fbc.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fbnoma::approx {

namespace {

constexpr double kLn2 = std::numbers::ln2;

void require_positive(double x, const char* who) {
    if (!(x > 0.0)) throw std::domain_error(std::string(who) + ": x must be > 0");
}

// Inverse of a strictly increasing function vanishing at 0+, by doubling
// bracket and bisection.
template <class F>
double invert_increasing(F&& fn, double level) {
    if (level <= 0.0) return 0.0;
    double hi = 1.0;
    while (fn(hi) < level) {
        hi *= 2.0;
        if (hi > 1e18) throw std::runtime_error("invert_increasing: no bracket");
    }
    double lo = 0.0;
    while (hi - lo > 1e-13 * (1.0 + hi)) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (fn(mid) < level)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

double g(double x) {
    require_positive(x, "g");
    return (x + 1.0) * std::log1p(x) / std::sqrt(x * (x + 2.0));
}

double g1(double x) {
    require_positive(x, "g1");
    return (x + 1.0) * std::sqrt(x * (x + 2.0));
}

double g2(double x) {
    require_positive(x, "g2");
    double t = x * (x + 2.0);
    return (x + 1.0) * t * std::sqrt(t) / (3.0 * x * x + 6.0 * x + 1.0);
}

BoundaryValues boundary_funcs(double x) {
    return {g(x), g1(x), g2(x)};
}

const CriticalPoint& critical_point() {
    static const CriticalPoint cp = [] {
        // Sign change of g2 - g on (0, 2] is verified before bisection.
        double lo = 1e-3, hi = 2.0;
        if (!(g2(lo) < g(lo) && g2(hi) > g(hi)))
            throw std::runtime_error("critical_point: no sign change on (0,2]");
        while (hi - lo > 1e-12) {
            double mid = 0.5 * (lo + hi);
            if (g2(mid) < g(mid))
                lo = mid;
            else
                hi = mid;
        }
        double x0 = 0.5 * (lo + hi);
        return CriticalPoint{x0, g(x0)};
    }();
    return cp;
}

double f_exact(double x, double a) {
    if (x < 0.0) throw std::domain_error("f_exact: x must be >= 0");
    if (x == 0.0) return 0.0;
    return std::log1p(x) - a * std::sqrt(x * (x + 2.0)) / (x + 1.0);
}

double f_prime(double x, double a) {
    require_positive(x, "f_prime");
    double g1x = x + 1.0;
    return 1.0 / g1x - a / (g1x * g1x * std::sqrt(x * (x + 2.0)));
}

double f_second(double x, double a) {
    require_positive(x, "f_second");
    double g1x = x + 1.0;
    double t = x * (x + 2.0);
    return -1.0 / (g1x * g1x) +
           a * (2.0 * t + g1x * g1x) / (g1x * g1x * g1x * t * std::sqrt(t));
}

ApproxContext ApproxContext::from_dispersion_scale(double a) {
    if (a < 0.0) throw std::domain_error("ApproxContext: a must be >= 0");
    ApproxContext ctx{};
    ctx.a = a;
    if (a == 0.0) {
        ctx.x_lo = 0.0;
        ctx.has_convex_segment = false;
        return ctx;
    }
    ctx.x_lo = invert_increasing([&](double x) { return g(x); }, a);
    ctx.has_convex_segment = a <= critical_point().beta;
    if (ctx.has_convex_segment) {
        ctx.x_mid = invert_increasing([&](double x) { return g2(x); }, a);
        ctx.f_mid = f_exact(ctx.x_mid, a);
        ctx.fprime_mid = f_prime(ctx.x_mid, a);
    }
    return ctx;
}

ApproxContext ApproxContext::make(double blocklength, double eps) {
    if (blocklength < 1.0)
        throw std::domain_error("ApproxContext: blocklength must be >= 1");
    double q = (eps == 0.5) ? 0.0 : fbc::q_inv(eps);
    return from_dispersion_scale(q / std::sqrt(blocklength));
}

double f_lower(double x, const ApproxContext& ctx) {
    if (!ctx.has_convex_segment)
        throw std::invalid_argument("f_lower: context has no convex segment");
    return ctx.fprime_mid * (x - ctx.x_mid) + ctx.f_mid;
}

double f_upper(double x, const ApproxContext& ctx) {
    if (!ctx.has_convex_segment)
        throw std::invalid_argument("f_upper: context has no convex segment");
    return ctx.f_mid / (ctx.x_mid - ctx.x_lo) * (x - ctx.x_lo);
}

double f_modified(double x, const ApproxContext& ctx) {
    if (x < ctx.x_lo && ctx.x_lo - x > 1e-12 * (1.0 + ctx.x_lo))
        throw std::domain_error("f_modified: x below the rate-positive domain edge");
    if (ctx.has_convex_segment && x < ctx.x_mid) return f_lower(x, ctx);
    return f_exact(x, ctx.a);
}

std::optional<double> sinr_approx(double bits, double blocklength, double eps,
                                  double gamma_upper) {
    return sinr_approx_with(ApproxContext::make(blocklength, eps), bits, blocklength,
                            gamma_upper);
}

std::optional<double> sinr_approx_with(const ApproxContext& ctx, double bits,
                                       double blocklength, double gamma_upper) {
    if (!(bits > 0.0)) throw std::invalid_argument("sinr_approx: bits must be > 0");
    if (!(gamma_upper > 0.0))
        throw std::invalid_argument("sinr_approx: gamma_upper must be > 0");
    double target = bits / blocklength * kLn2;

    if (ctx.has_convex_segment && target < ctx.f_mid) {
        // Explicit inverse of the tangent segment; lands in [x_lo, x_mid)
        // because targets are positive and f_lower(x_lo) <= 0.
        double x = ctx.x_mid + (target - ctx.f_mid) / ctx.fprime_mid;
        if (x > gamma_upper) return std::nullopt;
        return x;
    }

    double lo = ctx.has_convex_segment ? ctx.x_mid : ctx.x_lo;
    if (gamma_upper <= lo || f_exact(gamma_upper, ctx.a) < target)
        return std::nullopt;
    double hi = gamma_upper;
    while (hi - lo > 1e-10 * (1.0 + hi)) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (f_exact(mid, ctx.a) < target)
            lo = mid;
        else
            hi = mid;
    }
    double x = 0.5 * (lo + hi);
    for (int i = 0; i < 3; ++i) {
        double err = f_exact(x, ctx.a) - target;
        double d = f_prime(x, ctx.a);
        if (!(d > 0.0)) break;
        double xn = x - err / d;
        if (!(xn > 0.0) || !std::isfinite(xn)) break;
        x = xn;
    }
    return x;
}

} // namespace fbnoma::approx
