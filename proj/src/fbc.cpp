#include "fbnoma/fbc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace fbnoma::fbc {

namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kSqrt2Pi = 2.5066282746310005024;

// Acklam's rational approximation of the standard-normal quantile,
// relative error ~1.15e-9 before refinement.
double acklam_quantile(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;

    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p <= 1.0 - plow) {
        double q = p - 0.5;
        double r = q * q;
        return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
               (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

// sqrt(1 - 1/(1+g)^2) without cancellation.
double dispersion_root(double sinr) {
    return std::sqrt(sinr * (sinr + 2.0)) / (sinr + 1.0);
}

// dF/dg of the natural-log residual at fixed m.
double residual_dgamma(double m, double sinr, const FbcParams& p) {
    double sq = std::sqrt(sinr * (sinr + 2.0));
    double g1 = sinr + 1.0;
    return m / g1 - p.qinv * std::sqrt(m) / (g1 * g1 * sq);
}

} // namespace

double q_inv(double eps) {
    if (!(eps > 0.0 && eps < 1.0))
        throw std::domain_error("q_inv: eps must lie in (0,1)");
    if (eps == 0.5) return 0.0;

    // Q^{-1}(eps) = -Phi^{-1}(eps); the eps<0.5 branch of Acklam is the
    // accurate tail branch for our domain.
    double y = -acklam_quantile(eps);

    // Halley refinement on Q(y) - eps = 0 using erfc.
    for (int i = 0; i < 3; ++i) {
        double e = 0.5 * std::erfc(y / std::numbers::sqrt2) - eps;
        if (e == 0.0) break;
        double u = e * kSqrt2Pi * std::exp(0.5 * y * y);
        if (!std::isfinite(u)) break;
        double ynext = y + u / (1.0 - 0.5 * y * u);
        if (ynext == y) break;
        y = ynext;
    }
    return y;
}

FbcParams::FbcParams(int bits_, double error_prob_, int min_blocklength_)
    : bits(bits_), error_prob(error_prob_), min_blocklength(min_blocklength_),
      qinv(0.0) {
    if (bits < 1) throw std::invalid_argument("FbcParams: bits must be >= 1");
    if (!(error_prob > 0.0 && error_prob <= 0.5))
        throw std::invalid_argument("FbcParams: error_prob must lie in (0, 0.5]");
    if (min_blocklength < 1)
        throw std::invalid_argument("FbcParams: min_blocklength must be >= 1");
    qinv = (error_prob == 0.5) ? 0.0 : q_inv(error_prob);
}

double fbc_rate(double sinr, double blocklength, double eps) {
    if (sinr < 0.0) throw std::domain_error("fbc_rate: sinr must be >= 0");
    if (blocklength < 1.0) throw std::domain_error("fbc_rate: blocklength must be >= 1");
    if (!(eps > 0.0 && eps <= 0.5))
        throw std::domain_error("fbc_rate: eps must lie in (0, 0.5]");
    double q = (eps == 0.5) ? 0.0 : q_inv(eps);
    return std::log1p(sinr) / kLn2 -
           dispersion_root(sinr) / std::sqrt(blocklength) * q / kLn2;
}

double fbc_residual(double blocklength, double sinr, const FbcParams& p) {
    return blocklength * std::log1p(sinr) -
           std::sqrt(blocklength) * dispersion_root(sinr) * p.qinv -
           p.bits * kLn2;
}

double blocklength_for_sinr(double sinr, const FbcParams& p) {
    if (!(sinr > 0.0))
        throw std::domain_error("blocklength_for_sinr: sinr must be > 0");
    double log2g = std::log1p(sinr) / kLn2;
    double b = dispersion_root(sinr) * p.qinv / kLn2;
    double root = (b + std::sqrt(b * b + 4.0 * p.bits * log2g)) / (2.0 * log2g);
    return root * root;
}

namespace {

std::optional<double> bisect_gamma(double m, const FbcParams& p, double lo,
                                   double hi, double tol) {
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break; // bracket at FP resolution
        if (blocklength_for_sinr(mid, p) < m)
            hi = mid;
        else
            lo = mid;
    }

    // Newton polish on the residual, clamped to the bracket (which is
    // known to contain the root).
    double g = 0.5 * (lo + hi);
    const double target = 1e-13 * p.bits * kLn2;
    for (int i = 0; i < 4; ++i) {
        double f = fbc_residual(m, g, p);
        if (std::abs(f) <= target) break;
        double df = residual_dgamma(m, g, p);
        if (!(df > 0.0)) break;
        double gn = std::clamp(g - f / df, lo, hi);
        if (!(gn > 0.0) || !std::isfinite(gn) || gn == g) break;
        g = gn;
    }
    return g;
}

} // namespace

std::optional<double> sinr_for_blocklength(double blocklength, const FbcParams& p,
                                           double gamma_upper, double tol) {
    if (blocklength < 1.0)
        throw std::domain_error("sinr_for_blocklength: blocklength must be >= 1");
    if (!(gamma_upper > 0.0) || !(tol > 0.0))
        throw std::invalid_argument("sinr_for_blocklength: bad bracket or tolerance");

    double m_at_cap = blocklength_for_sinr(gamma_upper, p);
    if (m_at_cap > blocklength) return std::nullopt; // unbounded-SINR below the cap
    if (m_at_cap == blocklength) return gamma_upper;
    return bisect_gamma(blocklength, p, 0.0, gamma_upper, tol);
}

std::optional<double> sinr_for_blocklength(double blocklength, const FbcParams& p) {
    if (blocklength < 1.0)
        throw std::domain_error("sinr_for_blocklength: blocklength must be >= 1");
    double hi = 1.0;
    while (blocklength_for_sinr(hi, p) >= blocklength) {
        hi *= 2.0;
        if (hi > 1e18) return std::nullopt;
    }
    return bisect_gamma(blocklength, p, hi > 1.0 ? hi * 0.5 : 0.0, hi, 1e-9);
}

std::optional<double> snr_energy(double blocklength, const FbcParams& p,
                                 double gamma_upper) {
    auto g = sinr_for_blocklength(blocklength, p, gamma_upper);
    if (!g) return std::nullopt;
    return blocklength * *g;
}

std::optional<double> snr_energy(double blocklength, const FbcParams& p) {
    auto g = sinr_for_blocklength(blocklength, p);
    if (!g) return std::nullopt;
    return blocklength * *g;
}

double energy_monotonicity_bound() {
    return 2.0 * std::sqrt(kLn2) / (4.0 - std::numbers::sqrt2);
}

bool monotonicity_holds(const FbcParams& p) {
    return p.qinv / std::sqrt(static_cast<double>(p.bits)) <=
           energy_monotonicity_bound();
}

std::optional<RatePoint> rate_point_for_blocklength(double blocklength,
                                                    const FbcParams& p,
                                                    double gamma_upper) {
    auto g = sinr_for_blocklength(blocklength, p, gamma_upper);
    if (!g) return std::nullopt;
    return RatePoint{*g, blocklength, p.bits / blocklength};
}

} // namespace fbnoma::fbc
