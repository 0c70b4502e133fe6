#ifndef FBNOMA_APPROX_HPP
#define FBNOMA_APPROX_HPP

#include <optional>

// Concave surrogate of the finite-blocklength rate curve.
//
// With a = Qinv(eps)/sqrt(m), the rate constraint at blocklength m reads
// f(x) = ln(x+1) - a*sqrt(x(x+2))/(x+1) = (N/m)*ln2 in nats.  f is convex
// on [g^-1(a), g2^-1(a)] when a <= beta and concave above; the surrogate
// f_modified replaces the convex segment by the tangent at g2^-1(a),
// making the curve globally concave (and its inverse convex in N), which
// is what the golden-section bit search relies on.

namespace fbnoma::approx {

// Boundary functions of the convexity classification.  x > 0.
double g(double x);   // (x+1)ln(x+1)/sqrt(x(x+2)); f(x) >= 0 iff a <= g(x)
double g1(double x);  // (x+1)sqrt(x(x+2));         f'(x) >= 0 iff a <= g1(x)
double g2(double x);  // (x+1)(x(x+2))^1.5/(3x^2+6x+1); f''(x) <= 0 iff a <= g2(x)

struct BoundaryValues {
    double g, g1, g2;
};
BoundaryValues boundary_funcs(double x);

// The configuration-independent critical point: x0 solves g2(x) = g(x) on
// (0,2], beta = g(x0).  Computed once by bisection and cached.
struct CriticalPoint {
    double x0;
    double beta;
};
const CriticalPoint& critical_point();

double f_exact(double x, double a);  // nats per channel use
double f_prime(double x, double a);
double f_second(double x, double a);

// Per-(m,eps) surrogate context.  x_mid / tangent fields are meaningful
// only when has_convex_segment (a <= beta and a > 0).
struct ApproxContext {
    double a;           // Qinv(eps)/sqrt(m)
    double x_lo;        // g^-1(a), domain edge where f = 0
    bool has_convex_segment;
    double x_mid;       // g2^-1(a)
    double f_mid;       // f(x_mid)
    double fprime_mid;  // f'(x_mid)

    static ApproxContext make(double blocklength, double eps);
    static ApproxContext from_dispersion_scale(double a);
};

// Tangent of f at x_mid; lower-bounds f on the convex segment.
double f_lower(double x, const ApproxContext& ctx);
// Chord from (x_lo, 0) to (x_mid, f(x_mid)); upper-bounds f there.
double f_upper(double x, const ApproxContext& ctx);
// The piecewise surrogate: f_lower on [x_lo, x_mid), f elsewhere.
// Throws std::domain_error below x_lo.
double f_modified(double x, const ApproxContext& ctx);

// Inverse surrogate SINR map: the x solving f_modified(x) = (bits/m)*ln2,
// via the explicit linear inverse on the tangent segment and bisection on
// the concave one.  Returns nullopt when the demanded rate exceeds the
// surrogate's range under the SINR cap.  Upper-bounds the exact Gamma.
std::optional<double> sinr_approx(double bits, double blocklength, double eps,
                                  double gamma_upper);

// Same inverse with a prebuilt context (hot path of the bit-split search;
// ctx must have been built for this blocklength/eps).
std::optional<double> sinr_approx_with(const ApproxContext& ctx, double bits,
                                       double blocklength, double gamma_upper);

} // namespace fbnoma::approx

#endif
