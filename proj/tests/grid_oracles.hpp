#ifndef FBNOMA_TEST_GRID_ORACLES_HPP
#define FBNOMA_TEST_GRID_ORACLES_HPP

// Integer-grid brute-force minimizers for the solver optimality checks.
// They enumerate admissible blocklength pairs and recover powers from the
// case power formulas directly, independent of the solvers' argmin logic
// (the SINR kernel itself is shared; only the optimization is under test).

#include "fbnoma/fbc.hpp"
#include "fbnoma/noma.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace grid_oracle {

inline std::vector<double> gamma_table(int bits, double eps, int m_lo, int m_hi,
                                       int mhat) {
    fbnoma::fbc::FbcParams p(bits, eps, mhat);
    std::vector<double> t(m_hi - m_lo + 1);
    for (int m = m_lo; m <= m_hi; ++m) {
        auto g = fbnoma::fbc::sinr_for_blocklength(m, p);
        t[m - m_lo] = g ? *g : std::numeric_limits<double>::infinity();
    }
    return t;
}

// Minimum energy of the case-1 scheme over the integer grid
// mhat <= m1 <= D1, m1 <= m2 <= D2 with the SIC-at-receiver-2 powers.
inline std::optional<double> case1_min(const fbnoma::noma::ScenarioParams& sp) {
    int mhat = sp.min_blocklength;
    auto g1 = gamma_table(sp.user1.bits, sp.user1.error_prob, mhat, sp.user1.deadline,
                          mhat);
    auto g2 = gamma_table(sp.user2.bits, sp.user2.error_prob, mhat, sp.user2.deadline,
                          mhat);
    double h1 = sp.user1.gain, h2 = sp.user2.gain;
    double best = std::numeric_limits<double>::infinity();
    for (int m1 = mhat; m1 <= sp.user1.deadline; ++m1) {
        double a = g1[m1 - mhat];
        if (!std::isfinite(a)) continue;
        for (int m2 = m1; m2 <= sp.user2.deadline; ++m2) {
            double b = g2[m2 - mhat];
            if (!std::isfinite(b)) continue;
            double p1 = a * b / h2 + a / h1;
            double p2 = b / h2;
            if (p1 + p2 > sp.p_max) continue;
            double e = m1 * p1 + m2 * p2;
            if (e < best) best = e;
        }
    }
    if (!std::isfinite(best)) return std::nullopt;
    return best;
}

// Case-2 full-block grid (both treat interference as noise), mutual-
// interference power recovery, m1 <= m2.
inline std::optional<double> case2_full_min(const fbnoma::noma::ScenarioParams& sp) {
    int mhat = sp.min_blocklength;
    auto g1 = gamma_table(sp.user1.bits, sp.user1.error_prob, mhat, sp.user1.deadline,
                          mhat);
    auto g2 = gamma_table(sp.user2.bits, sp.user2.error_prob, mhat, sp.user2.deadline,
                          mhat);
    double h1 = sp.user1.gain, h2 = sp.user2.gain;
    double best = std::numeric_limits<double>::infinity();
    for (int m1 = mhat; m1 <= sp.user1.deadline; ++m1) {
        double a = g1[m1 - mhat];
        if (!std::isfinite(a)) continue;
        for (int m2 = m1; m2 <= sp.user2.deadline; ++m2) {
            double b = g2[m2 - mhat];
            if (!std::isfinite(b)) continue;
            double prod = a * b;
            if (prod >= 1.0) continue;
            double denom = h1 * h2 * (1.0 - prod);
            double p1 = (a * h2 + prod * h1) / denom;
            double p2 = (b * h1 + prod * h2) / denom;
            if (p1 + p2 > sp.p_max) continue;
            double e = m1 * p1 + m2 * p2;
            if (e < best) best = e;
        }
    }
    if (!std::isfinite(best)) return std::nullopt;
    return best;
}

// Case-2 SIC grid (receiver 1 cancels user 2), mhat <= m2 <= m1 <= D1.
inline std::optional<double> case2_sic_min(const fbnoma::noma::ScenarioParams& sp) {
    int mhat = sp.min_blocklength;
    auto g1 = gamma_table(sp.user1.bits, sp.user1.error_prob, mhat, sp.user1.deadline,
                          mhat);
    auto g2 = gamma_table(sp.user2.bits, sp.user2.error_prob, mhat, sp.user1.deadline,
                          mhat);
    double h1 = sp.user1.gain, h2 = sp.user2.gain;
    double best = std::numeric_limits<double>::infinity();
    for (int m1 = mhat; m1 <= sp.user1.deadline; ++m1) {
        double a = g1[m1 - mhat];
        if (!std::isfinite(a)) continue;
        for (int m2 = mhat; m2 <= m1; ++m2) {
            double b = g2[m2 - mhat];
            if (!std::isfinite(b)) continue;
            double p1 = a / h1;
            double p2 = a * b / h1 + b / h2;
            if (p1 + p2 > sp.p_max) continue;
            double e = m1 * p1 + m2 * p2;
            if (e < best) best = e;
        }
    }
    if (!std::isfinite(best)) return std::nullopt;
    return best;
}

// Scheme-wide grid minimum matching solve_noma's dispatch.
inline std::optional<double> noma_min(const fbnoma::noma::ScenarioParams& sp) {
    if (sp.user1.gain <= sp.user2.gain) return case1_min(sp);
    auto a = case2_full_min(sp);
    auto b = case2_sic_min(sp);
    if (!a) return b;
    if (!b) return a;
    return std::min(*a, *b);
}

} // namespace grid_oracle

#endif
