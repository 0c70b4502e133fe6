#ifndef FBNOMA_FBC_HPP
#define FBNOMA_FBC_HPP

#include <optional>

// Normal-approximation rate model for finite-blocklength codes:
//
//   N/m = log2(1+g) - sqrt((1/m)(1 - 1/(1+g)^2)) * Qinv(eps)/ln2
//
// with blocklength m (symbols), SINR g (linear), information bits N and
// block error probability eps.  This header provides the formula, its
// residual form in natural log, the closed-form inverse in blocklength,
// and the implicit SINR function Gamma(m) obtained by bisection.
//
// The model is the plain normal approximation; higher-order O(log(m)/m)
// blocklength corrections are deliberately not applied.
//
// All functions are pure; safe for unrestricted concurrent use.

namespace fbnoma::fbc {

// Inverse of the Gaussian Q-function (upper-tail standard-normal quantile).
// Valid on (0,1); relative error below 1e-9 for eps in [1e-12, 0.5].
// Throws std::domain_error outside (0,1).
double q_inv(double eps);

// Parameters of one rate constraint.  eps is accepted up to and including
// 0.5, where the dispersion term vanishes and the model degenerates to the
// Shannon rate (used by the Shannon-capacity baseline).
struct FbcParams {
    int bits;              // N >= 1
    double error_prob;     // 0 < eps <= 0.5
    int min_blocklength;   // m_hat, validity floor of the approximation
    double qinv;           // cached Qinv(error_prob)

    FbcParams(int bits, double error_prob, int min_blocklength = 100);
};

// A solved (sinr, blocklength, rate) triple, rate = N/m in bits/channel use.
struct RatePoint {
    double sinr;
    double blocklength;
    double rate;
};

// Achievable rate in bits per channel use.  May be negative for small m;
// callers decide what a negative rate means.
double fbc_rate(double sinr, double blocklength, double eps);

// Residual of the rate constraint in natural-log form,
//   m*ln(1+g) - sqrt(m)*sqrt(g(g+2))/(g+1)*Qinv(eps) - N*ln2,
// zero iff (m,g) satisfies N/m = fbc_rate(g,m,eps).
double fbc_residual(double blocklength, double sinr, const FbcParams& p);

// Closed-form blocklength satisfying the rate constraint at a given SINR:
// the positive root of the residual viewed as a quadratic in sqrt(m).
// Throws std::domain_error for sinr <= 0.
double blocklength_for_sinr(double sinr, const FbcParams& p);

// Implicit SINR function Gamma(m): the unique g with
// fbc_residual(m, g, p) = 0, found by bisection on [0, gamma_upper].
// Each trial SINR is mapped through blocklength_for_sinr and compared
// against m; the final bracket is polished with Newton steps on the
// residual.  Returns nullopt when no SINR below gamma_upper reaches the
// demanded rate (unbounded-SINR: N too large for m under the cap).
std::optional<double> sinr_for_blocklength(double blocklength, const FbcParams& p,
                                           double gamma_upper, double tol = 1e-9);

// As above with an automatic upper bracket (doubling search, cap 1e18).
std::optional<double> sinr_for_blocklength(double blocklength, const FbcParams& p);

// E(m) = m * Gamma(m), in SINR*symbols.  Divide by the channel gain for
// power*symbols.
std::optional<double> snr_energy(double blocklength, const FbcParams& p,
                                 double gamma_upper);
std::optional<double> snr_energy(double blocklength, const FbcParams& p);

// Condition Qinv(eps)/sqrt(N) <= 2*sqrt(ln2)/(4-sqrt(2)) under
// which E(m) is strictly decreasing in m.
bool monotonicity_holds(const FbcParams& p);

// The constant 2*sqrt(ln2)/(4-sqrt(2)) = 0.64394...
double energy_monotonicity_bound();

// Convenience: Gamma(m) packaged with its blocklength and rate.
std::optional<RatePoint> rate_point_for_blocklength(double blocklength,
                                                    const FbcParams& p,
                                                    double gamma_upper);

} // namespace fbnoma::fbc

#endif
