#ifndef FBNOMA_TEST_ORACLES_HPP
#define FBNOMA_TEST_ORACLES_HPP

// Independent reference computations used to freeze expected values and to
// cross-check the library.  Everything here is deliberately written from
// the defining formulas (long double, plain bisection), not by calling the
// implementation under test.

#include <cmath>
#include <functional>
#include <stdexcept>

namespace oracle {

// Upper-tail standard-normal quantile via bisection on erfcl.
inline long double q_inv(long double eps) {
    if (!(eps > 0.0L && eps < 1.0L)) throw std::invalid_argument("oracle::q_inv");
    const long double sqrt2 = 1.41421356237309504880168872420969808L;
    auto Q = [&](long double y) { return 0.5L * erfcl(y / sqrt2); };
    long double lo = -45.0L, hi = 45.0L; // Q(lo)~1, Q(hi)~0
    for (int i = 0; i < 300; ++i) {
        long double mid = 0.5L * (lo + hi);
        if (Q(mid) > eps)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5L * (lo + hi);
}

// Rate-constraint residual in the bits form of the capacity formula:
//   m*log2(1+x) - sqrt(m*(1-1/(1+x)^2))*Q/ln2 - N.
// Distinct scaling route from the implementation's natural-log form.
inline long double residual_bits(long double m, long double x, long double bits,
                                 long double qinv) {
    const long double ln2 = 0.693147180559945309417232121458176568L;
    long double disp = 1.0L - 1.0L / ((1.0L + x) * (1.0L + x));
    return m * log1pl(x) / ln2 - sqrtl(m * disp) * qinv / ln2 - bits;
}

// Gamma(m): bisection for the SINR meeting rate N/m, bits form.
inline long double gamma_for_blocklength(long double m, long double bits,
                                         long double eps) {
    long double q = (eps == 0.5L) ? 0.0L : q_inv(eps);
    long double lo = 0.0L, hi = 1.0L;
    while (residual_bits(m, hi, bits, q) < 0.0L) {
        hi *= 2.0L;
        if (hi > 1e24L) throw std::runtime_error("oracle gamma: no bracket");
    }
    for (int i = 0; i < 200; ++i) {
        long double mid = 0.5L * (lo + hi);
        if (residual_bits(m, mid, bits, q) < 0.0L)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5L * (lo + hi);
}

// Generic bisection root finder for f(x)=0 with f(lo)<0<f(hi) or reversed.
inline long double bisect(const std::function<long double(long double)>& f,
                          long double lo, long double hi, int iters = 200) {
    long double flo = f(lo);
    for (int i = 0; i < iters; ++i) {
        long double mid = 0.5L * (lo + hi);
        if ((f(mid) < 0.0L) == (flo < 0.0L))
            lo = mid;
        else
            hi = mid;
    }
    return 0.5L * (lo + hi);
}

// Root of g2(x) = g(x) on (0,2) plus the critical level beta = g(x0),
// the constants of the convexity classification.
inline void convexity_critical_constants(long double& x0, long double& beta) {
    auto g = [](long double x) {
        return (x + 1.0L) * log1pl(x) / sqrtl(x * (x + 2.0L));
    };
    auto g2 = [](long double x) {
        long double t = x * (x + 2.0L);
        return (x + 1.0L) * t * sqrtl(t) / (3.0L * x * x + 6.0L * x + 1.0L);
    };
    x0 = bisect([&](long double x) { return g2(x) - g(x); }, 0.1L, 2.0L);
    beta = g(x0);
}

} // namespace oracle

#endif
