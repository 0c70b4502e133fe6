#include "fbnoma/hybrid.hpp"

#include "fbnoma/approx.hpp"
#include "fbnoma/fbc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace fbnoma::hybrid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kGoldenRatio = 0.618; // section ratio of the bit-split search

double gamma_or_inf(int bits, double eps, double m, double cap, int mhat,
                    double tol = 1e-9) {
    if (bits == 0) return 0.0;
    fbc::FbcParams p(bits, eps, mhat);
    auto g = fbc::sinr_for_blocklength(m, p, cap, tol);
    return g ? *g : kInf;
}

// Energy of one split point given the three SINRs.
double split_energy_case1(double m1, double g1, double m21, double g21, double m22,
                          double g22, double h1, double h2) {
    return m1 * g1 / h1 + (m1 * g1 + m21) * g21 / h2 + m22 * g22 / h2;
}

double split_energy_case2(double m1, double g1, double g21, double m22, double g22,
                          double h1, double h2) {
    return m1 * g1 / h1 + m1 * g1 * g21 / h1 + m1 * g21 / h2 + m22 * g22 / h2;
}

struct SplitPoint {
    double energy = kInf;
    int m21 = -1, n21 = -1, m1 = -1;
    double g1 = 0, g21 = 0, g22 = 0;
    double p1 = 0, p21 = 0, p22 = 0;

    // Deterministic order: energy, then smallest m21, n21, m1.
    bool better_than(const SplitPoint& o) const {
        if (energy != o.energy) return energy < o.energy;
        if (m21 != o.m21) return m21 < o.m21;
        if (n21 != o.n21) return n21 < o.n21;
        return m1 < o.m1;
    }
};

HybridAllocation make_split_allocation(int case_tag, const SplitPoint& b, int n2,
                                       int d2) {
    HybridAllocation a{};
    a.case_tag = case_tag;
    a.mode = HybridMode::split;
    a.n21 = b.n21;
    a.n22 = n2 - b.n21;
    a.m1 = b.m1;
    a.m22 = d2 - b.m21;
    a.sinr1 = b.g1;
    a.p1 = b.p1;
    a.sinr22 = b.g22;
    a.p22 = b.p22;
    if (b.n21 == 0) { // zero-bit slot is dropped entirely
        a.m21 = 0;
        a.sinr21 = 0.0;
        a.p21 = 0.0;
    } else {
        a.m21 = b.m21;
        a.sinr21 = b.g21;
        a.p21 = b.p21;
    }
    a.energy = b.energy;
    return a;
}

HybridAllocation make_endpoint_allocation(int case_tag, const noma::NomaAllocation& n,
                                          int n2) {
    HybridAllocation a{};
    a.case_tag = case_tag;
    a.mode = HybridMode::pure_noma;
    a.noma_scheme = n.scheme;
    a.n21 = n2;
    a.n22 = 0;
    a.m1 = n.m1;
    a.m21 = n.m2;
    a.m22 = 0;
    a.sinr1 = n.sinr1;
    a.sinr21 = n.sinr2;
    a.sinr22 = 0.0;
    a.p1 = n.p1;
    a.p21 = n.p2;
    a.p22 = 0.0;
    a.energy = n.energy;
    return a;
}

void require_monotonicity(const HybridParams& hp) {
    fbc::FbcParams p1(hp.base.user1.bits, hp.base.user1.error_prob,
                      hp.base.min_blocklength);
    fbc::FbcParams p2(hp.base.user2.bits, hp.base.user2.error_prob,
                      hp.base.min_blocklength);
    if (!fbc::monotonicity_holds(p1) || !fbc::monotonicity_holds(p2))
        throw std::domain_error("hybrid: energy-monotonicity condition fails");
}

// Exact user-1 SINR table over m1 in [mhat, d1]; inf marks unreachable.
std::vector<double> user1_gamma_table(const HybridParams& hp) {
    const auto& u1 = hp.base.user1;
    double cap1 = hp.base.p_max * u1.gain + 1.0;
    fbc::FbcParams p1(u1.bits, u1.error_prob, hp.base.min_blocklength);
    std::vector<double> g1(u1.deadline - hp.base.min_blocklength + 1);
    for (int m = hp.base.min_blocklength; m <= u1.deadline; ++m) {
        auto g = fbc::sinr_for_blocklength(m, p1, cap1, hp.base.sinr_tol);
        g1[m - hp.base.min_blocklength] = g ? *g : kInf;
    }
    return g1;
}

} // namespace

void HybridParams::validate() const {
    base.validate();
    if (!(eps21 > 0.0 && eps21 <= 0.5) || !(eps22 > 0.0 && eps22 <= 0.5))
        throw std::invalid_argument("HybridParams: eps21/eps22 must lie in (0, 0.5]");
}

bool in_feasible_set_H(const Candidate& c, const HybridParams& hp) {
    hp.validate();
    const auto& b = hp.base;
    int n22 = b.user2.bits - c.n21;
    if (c.n21 < 0 || n22 < 0) return false;
    double cap1 = b.p_max * b.user1.gain + 1.0;
    double cap2 = b.p_max * b.user2.gain + 1.0;
    double g1 = gamma_or_inf(b.user1.bits, b.user1.error_prob, c.m1, cap1,
                             b.min_blocklength, b.sinr_tol);
    double g21 = gamma_or_inf(c.n21, hp.eps21, c.m21, cap2, b.min_blocklength, b.sinr_tol);
    double g22 = gamma_or_inf(n22, hp.eps22, c.m22, cap2, b.min_blocklength, b.sinr_tol);
    if (!std::isfinite(g1) || !std::isfinite(g21) || !std::isfinite(g22)) return false;
    double h1 = b.user1.gain, h2 = b.user2.gain;
    double p1 = g1 * g21 / h2 + g1 / h1;
    double p21 = g21 / h2;
    double p22 = g22 / h2;
    return p1 + p21 <= b.p_max && p22 <= b.p_max;
}

// ---------------------------------------------------------------------------
// Exhaustive benchmarks
// ---------------------------------------------------------------------------

namespace {

struct ExhaustiveTables {
    int mhat, d1, d2, n2;
    int mcols;                // m21 in [mhat, d2 - mhat]
    std::vector<double> g1;   // [m1 - mhat]
    std::vector<double> g21;  // [n21 * mcols + (m21 - mhat)]
    std::vector<double> g22;  // same indexing, SINR of (n2 - n21, d2 - m21)
};

ExhaustiveTables build_tables_case1(const HybridParams& hp, bool parallel) {
    const auto& b = hp.base;
    ExhaustiveTables t;
    t.mhat = b.min_blocklength;
    t.d1 = b.user1.deadline;
    t.d2 = b.user2.deadline;
    t.n2 = b.user2.bits;
    t.mcols = t.d2 - 2 * t.mhat + 1;
    if (t.mcols < 1)
        throw std::invalid_argument("hybrid exhaustive: D2 < 2*min_blocklength");
    t.g1 = user1_gamma_table(hp);
    t.g21.assign(static_cast<size_t>(t.n2) * t.mcols, 0.0);
    t.g22.assign(static_cast<size_t>(t.n2) * t.mcols, 0.0);
    double cap2 = b.p_max * b.user2.gain + 1.0;

#pragma omp parallel for schedule(dynamic, 1) if (parallel)
    for (int n21 = 0; n21 < t.n2; ++n21) {
        for (int j = 0; j < t.mcols; ++j) {
            int m21 = t.mhat + j;
            int m22 = t.d2 - m21;
            t.g21[static_cast<size_t>(n21) * t.mcols + j] =
                gamma_or_inf(n21, hp.eps21, m21, cap2, t.mhat, b.sinr_tol);
            t.g22[static_cast<size_t>(n21) * t.mcols + j] =
                gamma_or_inf(t.n2 - n21, hp.eps22, m22, cap2, t.mhat, b.sinr_tol);
        }
    }
    return t;
}

// Best split point at one m21 column (scans n21 and m1).
SplitPoint best_at_m21_case1(const ExhaustiveTables& t, const HybridParams& hp,
                             int m21) {
    const auto& b = hp.base;
    double h1 = b.user1.gain, h2 = b.user2.gain;
    int j = m21 - t.mhat;
    int m22 = t.d2 - m21;
    int m1_hi = std::min(m21, t.d1);
    SplitPoint best;
    for (int n21 = 0; n21 < t.n2; ++n21) {
        double g21 = t.g21[static_cast<size_t>(n21) * t.mcols + j];
        double g22 = t.g22[static_cast<size_t>(n21) * t.mcols + j];
        if (!std::isfinite(g21) || !std::isfinite(g22)) continue;
        double p21 = g21 / h2;
        double p22 = g22 / h2;
        if (p22 > b.p_max) continue;
        for (int m1 = t.mhat; m1 <= m1_hi; ++m1) {
            double g1 = t.g1[m1 - t.mhat];
            if (!std::isfinite(g1)) continue;
            double p1 = g1 * g21 / h2 + g1 / h1;
            if (p1 + p21 > b.p_max) continue;
            double e = split_energy_case1(m1, g1, m21, g21, m22, g22, h1, h2);
            SplitPoint cand{e, m21, n21, m1, g1, g21, g22, p1, p21, p22};
            if (cand.better_than(best)) best = cand;
        }
    }
    return best;
}

SolveResult<HybridAllocation> exhaustive_case1(const HybridParams& hp, bool parallel) {
    hp.validate();
    if (hp.base.user1.gain > hp.base.user2.gain)
        throw std::invalid_argument("solve_hybrid_exhaustive: requires h1 <= h2");

    ExhaustiveTables t = build_tables_case1(hp, parallel);
    std::vector<SplitPoint> per_m21(t.mcols);

#pragma omp parallel for schedule(dynamic, 8) if (parallel)
    for (int j = 0; j < t.mcols; ++j)
        per_m21[j] = best_at_m21_case1(t, hp, t.mhat + j);

    SplitPoint best;
    for (const auto& p : per_m21)
        if (p.better_than(best)) best = p;

    auto endpoint = noma::solve_case1(hp.base);

    if (!std::isfinite(best.energy) && !endpoint.feasible())
        return SolveResult<HybridAllocation>::fail(InfeasibleReason::power_budget);
    if (endpoint.feasible() &&
        (!std::isfinite(best.energy) || endpoint.value().energy < best.energy))
        return SolveResult<HybridAllocation>::ok(
            make_endpoint_allocation(1, endpoint.value(), t.n2));
    return SolveResult<HybridAllocation>::ok(make_split_allocation(1, best, t.n2, t.d2));
}

} // namespace

SolveResult<HybridAllocation> solve_hybrid_exhaustive(const HybridParams& hp) {
    return exhaustive_case1(hp, true);
}

SolveResult<HybridAllocation> solve_hybrid_exhaustive_serial(const HybridParams& hp) {
    return exhaustive_case1(hp, false);
}

SolveResult<HybridAllocation> solve_hybrid_case2_exhaustive(const HybridParams& hp) {
    hp.validate();
    const auto& b = hp.base;
    if (!(b.user1.gain > b.user2.gain))
        throw std::invalid_argument("solve_hybrid_case2_exhaustive: requires h1 > h2");

    int mhat = b.min_blocklength;
    int n2 = b.user2.bits;
    int m1_hi = std::min(b.user1.deadline, b.user2.deadline - mhat);
    double h1 = b.user1.gain, h2 = b.user2.gain;
    double cap2 = b.p_max * h2 + 1.0;
    std::vector<double> g1tab = user1_gamma_table(hp);

    std::vector<SplitPoint> per_m1(std::max(0, m1_hi - mhat + 1));

#pragma omp parallel for schedule(dynamic, 4)
    for (int m1 = mhat; m1 <= m1_hi; ++m1) {
        int m22 = b.user2.deadline - m1;
        double g1 = g1tab[m1 - mhat];
        SplitPoint best;
        if (std::isfinite(g1)) {
            double p1 = g1 / h1;
            for (int n21 = 0; n21 < n2; ++n21) {
                double g21 = gamma_or_inf(n21, hp.eps21, m1, cap2, mhat, b.sinr_tol);
                double g22 = gamma_or_inf(n2 - n21, hp.eps22, m22, cap2, mhat, b.sinr_tol);
                if (!std::isfinite(g21) || !std::isfinite(g22)) continue;
                double p21 = g1 * g21 / h1 + g21 / h2;
                double p22 = g22 / h2;
                if (p1 + p21 > b.p_max || p22 > b.p_max) continue;
                double e = split_energy_case2(m1, g1, g21, m22, g22, h1, h2);
                SplitPoint cand{e, m1, n21, m1, g1, g21, g22, p1, p21, p22};
                if (cand.better_than(best)) best = cand;
            }
        }
        per_m1[m1 - mhat] = best;
    }

    SplitPoint best;
    for (const auto& p : per_m1)
        if (p.better_than(best)) best = p;

    auto endpoint = noma::solve_noma(hp.base);
    if (!std::isfinite(best.energy) && !endpoint.feasible())
        return SolveResult<HybridAllocation>::fail(InfeasibleReason::power_budget);
    if (endpoint.feasible() &&
        (!std::isfinite(best.energy) || endpoint.value().energy < best.energy))
        return SolveResult<HybridAllocation>::ok(
            make_endpoint_allocation(2, endpoint.value(), n2));
    return SolveResult<HybridAllocation>::ok(
        make_split_allocation(2, best, n2, b.user2.deadline));
}

// ---------------------------------------------------------------------------
// Objectives and golden-section search
// ---------------------------------------------------------------------------

namespace {

// SINR of one user-2 slot under either map; +inf when the rate demand is
// unreachable below the cap.
double slot_gamma(double bits, double m, double eps, double cap, int mhat,
                  SinrMap map) {
    if (bits <= 0.0) return 0.0;
    if (map == SinrMap::exact) {
        auto n = static_cast<int>(std::llround(bits));
        if (std::abs(bits - n) > 1e-9)
            throw std::invalid_argument("hybrid objective: exact map needs integer bits");
        return gamma_or_inf(n, eps, m, cap, mhat);
    }
    auto x = approx::sinr_approx(bits, m, eps, cap);
    return x ? *x : kInf;
}

} // namespace

double hybrid_objective_case_a(double n21, int m21, const HybridParams& hp,
                               SinrMap map) {
    hp.validate();
    const auto& b = hp.base;
    int mhat = b.min_blocklength;
    if (m21 < mhat || m21 > std::min(b.user1.deadline, b.user2.deadline - mhat))
        throw std::invalid_argument("hybrid_objective_case_a: m21 out of range");
    if (n21 < 0.0 || n21 > b.user2.bits - 1)
        throw std::invalid_argument("hybrid_objective_case_a: n21 out of range");
    int m1 = m21;
    int m22 = b.user2.deadline - m21;
    double cap1 = b.p_max * b.user1.gain + 1.0;
    double cap2 = b.p_max * b.user2.gain + 1.0;
    double g1 = gamma_or_inf(b.user1.bits, b.user1.error_prob, m1, cap1, mhat);
    double g21 = slot_gamma(n21, m21, hp.eps21, cap2, mhat, map);
    double g22 = slot_gamma(b.user2.bits - n21, m22, hp.eps22, cap2, mhat, map);
    return split_energy_case1(m1, g1, m21, g21, m22, g22, b.user1.gain, b.user2.gain);
}

double hybrid_objective_case_b(double n21, int m21, const HybridParams& hp,
                               SinrMap map) {
    hp.validate();
    const auto& b = hp.base;
    int mhat = b.min_blocklength;
    if (m21 < b.user1.deadline || m21 > b.user2.deadline - mhat)
        throw std::invalid_argument("hybrid_objective_case_b: m21 out of range");
    if (n21 < 0.0 || n21 > b.user2.bits - 1)
        throw std::invalid_argument("hybrid_objective_case_b: n21 out of range");
    int m1 = b.user1.deadline;
    int m22 = b.user2.deadline - m21;
    double cap1 = b.p_max * b.user1.gain + 1.0;
    double cap2 = b.p_max * b.user2.gain + 1.0;
    double g1 = gamma_or_inf(b.user1.bits, b.user1.error_prob, m1, cap1, mhat);
    double g21 = slot_gamma(n21, m21, hp.eps21, cap2, mhat, map);
    double g22 = slot_gamma(b.user2.bits - n21, m22, hp.eps22, cap2, mhat, map);
    return split_energy_case1(m1, g1, m21, g21, m22, g22, b.user1.gain, b.user2.gain);
}

double hybrid_objective_case2(double n21, int m1, const HybridParams& hp, SinrMap map) {
    hp.validate();
    const auto& b = hp.base;
    int mhat = b.min_blocklength;
    if (m1 < mhat || m1 > std::min(b.user1.deadline, b.user2.deadline - mhat))
        throw std::invalid_argument("hybrid_objective_case2: m1 out of range");
    if (n21 < 0.0 || n21 > b.user2.bits - 1)
        throw std::invalid_argument("hybrid_objective_case2: n21 out of range");
    int m22 = b.user2.deadline - m1;
    double cap1 = b.p_max * b.user1.gain + 1.0;
    double cap2 = b.p_max * b.user2.gain + 1.0;
    double g1 = gamma_or_inf(b.user1.bits, b.user1.error_prob, m1, cap1, mhat);
    double g21 = slot_gamma(n21, m1, hp.eps21, cap2, mhat, map);
    double g22 = slot_gamma(b.user2.bits - n21, m22, hp.eps22, cap2, mhat, map);
    return split_energy_case2(m1, g1, g21, m22, g22, b.user1.gain, b.user2.gain);
}

GoldenResult golden_section_integer(const std::function<double(double)>& objective,
                                    int n2, double eps0) {
    if (n2 < 1) throw std::invalid_argument("golden_section_integer: n2 must be >= 1");
    if (!(eps0 > 0.0)) throw std::invalid_argument("golden_section_integer: eps0 <= 0");
    if (n2 == 1) return {0, objective(0.0), 0};

    double lo = 0.0, hi = static_cast<double>(n2 - 1);
    int iterations = 0;
    while (hi - lo >= eps0) {
        double nl = lo + (1.0 - kGoldenRatio) * (hi - lo);
        double nu = lo + kGoldenRatio * (hi - lo);
        if (objective(nl) >= objective(nu))
            lo = nl;
        else
            hi = nu;
        ++iterations;
    }

    int first = std::max(0, static_cast<int>(std::floor(lo)));
    int last = std::min(n2 - 1, static_cast<int>(std::ceil(hi)));
    int best_n = first;
    double best_e = objective(first);
    for (int n = first + 1; n <= last; ++n) {
        double e = objective(n);
        if (e < best_e) {
            best_e = e;
            best_n = n;
        }
    }
    return {best_n, best_e, iterations};
}

GoldenResult golden_section_bits(int m21, ObjectiveCase which, const HybridParams& hp,
                                 double eps0) {
    auto obj = [&](double n) {
        return which == ObjectiveCase::case_a
                   ? hybrid_objective_case_a(n, m21, hp, SinrMap::surrogate)
                   : hybrid_objective_case_b(n, m21, hp, SinrMap::surrogate);
    };
    GoldenResult gr = golden_section_integer(obj, hp.base.user2.bits, eps0);
    // The surrogate over-charges vanishing rates (the tangent bound is
    // loosest where it crosses zero), while an empty slot costs nothing;
    // score the N21 = 0 endpoint explicitly.
    if (gr.n21 != 0) {
        double e0 = obj(0.0);
        if (e0 <= gr.energy) {
            gr.n21 = 0;
            gr.energy = e0;
        }
    }
    return gr;
}

// ---------------------------------------------------------------------------
// Efficient solvers (outer scan + golden section on the surrogate)
// ---------------------------------------------------------------------------

namespace {

struct SurrogateSlot {
    approx::ApproxContext ctx;
    double blocklength;
    double cap;

    double gamma(double bits) const {
        if (bits <= 0.0) return 0.0;
        auto x = approx::sinr_approx_with(ctx, bits, blocklength, cap);
        return x ? *x : kInf;
    }
};

// The phase-1 power p1 + p21 grows with n21 and the clean-slot power p22
// shrinks, so the power-feasible bit splits form an interval [lo, hi].
// When the golden-section winner falls outside it, the convexity of the
// objective makes the clamped end the constrained optimum.
// phase1_ok must be monotone nonincreasing in n, slot2_ok nondecreasing.
template <class PredA, class PredB>
bool feasible_bit_interval(int n2, PredA&& phase1_ok, PredB&& slot2_ok, int& lo,
                           int& hi) {
    if (!phase1_ok(0)) return false;
    int a = 0, b = n2 - 1; // largest n with phase1_ok
    if (phase1_ok(b)) {
        hi = b;
    } else {
        while (b - a > 1) {
            int mid = a + (b - a) / 2;
            (phase1_ok(mid) ? a : b) = mid;
        }
        hi = a;
    }
    if (!slot2_ok(n2 - 1)) return false;
    a = 0;
    b = n2 - 1; // smallest n with slot2_ok
    if (slot2_ok(a)) {
        lo = a;
    } else {
        while (b - a > 1) {
            int mid = a + (b - a) / 2;
            (slot2_ok(mid) ? b : a) = mid;
        }
        lo = b;
    }
    return lo <= hi;
}

SolveResult<HybridAllocation> finish(int case_tag, const SplitPoint& best,
                                     const SolveResult<noma::NomaAllocation>& endpoint,
                                     int n2, int d2) {
    if (!std::isfinite(best.energy) && !endpoint.feasible())
        return SolveResult<HybridAllocation>::fail(InfeasibleReason::power_budget);
    if (endpoint.feasible() &&
        (!std::isfinite(best.energy) || endpoint.value().energy < best.energy))
        return SolveResult<HybridAllocation>::ok(
            make_endpoint_allocation(case_tag, endpoint.value(), n2));
    return SolveResult<HybridAllocation>::ok(
        make_split_allocation(case_tag, best, n2, d2));
}

} // namespace

SolveResult<HybridAllocation> solve_hybrid_case1(const HybridParams& hp) {
    hp.validate();
    const auto& b = hp.base;
    if (b.user1.gain > b.user2.gain)
        throw std::invalid_argument("solve_hybrid_case1: requires h1 <= h2");
    require_monotonicity(hp);

    int mhat = b.min_blocklength;
    int d1 = b.user1.deadline, d2 = b.user2.deadline;
    int n2 = b.user2.bits;
    double h1 = b.user1.gain, h2 = b.user2.gain;
    double cap2 = b.p_max * h2 + 1.0;
    std::vector<double> g1tab = user1_gamma_table(hp);

    SplitPoint best;
    for (int m21 = mhat; m21 <= d2 - mhat; ++m21) {
        int m1 = m21 < d1 ? m21 : d1;
        double g1 = g1tab[m1 - mhat];
        if (!std::isfinite(g1)) continue;
        int m22 = d2 - m21;

        SurrogateSlot s21{approx::ApproxContext::make(m21, hp.eps21), double(m21), cap2};
        SurrogateSlot s22{approx::ApproxContext::make(m22, hp.eps22), double(m22), cap2};
        auto surrogate = [&](double n) {
            return split_energy_case1(m1, g1, m21, s21.gamma(n), m22,
                                      s22.gamma(n2 - n), h1, h2);
        };
        GoldenResult gr = golden_section_integer(surrogate, n2, 0.5);

        bool golden_feasible = false;
        auto try_candidate = [&](int n) {
            double g21 = gamma_or_inf(n, hp.eps21, m21, cap2, mhat, b.sinr_tol);
            double g22 = gamma_or_inf(n2 - n, hp.eps22, m22, cap2, mhat, b.sinr_tol);
            if (!std::isfinite(g21) || !std::isfinite(g22)) return false;
            double p1 = g1 * g21 / h2 + g1 / h1;
            double p21 = g21 / h2;
            double p22 = g22 / h2;
            if (p1 + p21 > b.p_max || p22 > b.p_max) return false;
            double e = split_energy_case1(m1, g1, m21, g21, m22, g22, h1, h2);
            SplitPoint cand{e, m21, n, m1, g1, g21, g22, p1, p21, p22};
            if (cand.better_than(best)) best = cand;
            return true;
        };
        golden_feasible = try_candidate(gr.n21);
        if (gr.n21 != 0) try_candidate(0);
        if (!golden_feasible) {
            auto phase1_ok = [&](int n) {
                double g21 = gamma_or_inf(n, hp.eps21, m21, cap2, mhat, b.sinr_tol);
                return std::isfinite(g21) &&
                       g1 * g21 / h2 + g1 / h1 + g21 / h2 <= b.p_max;
            };
            auto slot2_ok = [&](int n) {
                double g22 = gamma_or_inf(n2 - n, hp.eps22, m22, cap2, mhat, b.sinr_tol);
                return std::isfinite(g22) && g22 / h2 <= b.p_max;
            };
            int lo, hi;
            if (feasible_bit_interval(n2, phase1_ok, slot2_ok, lo, hi))
                try_candidate(std::clamp(gr.n21, lo, hi));
        }
    }

    return finish(1, best, noma::solve_case1(b), n2, d2);
}

SolveResult<HybridAllocation> solve_hybrid_case2(const HybridParams& hp) {
    hp.validate();
    const auto& b = hp.base;
    if (!(b.user1.gain > b.user2.gain))
        throw std::invalid_argument("solve_hybrid_case2: requires h1 > h2");
    require_monotonicity(hp);

    int mhat = b.min_blocklength;
    int d2 = b.user2.deadline;
    int n2 = b.user2.bits;
    int m1_hi = std::min(b.user1.deadline, d2 - mhat);
    double h1 = b.user1.gain, h2 = b.user2.gain;
    double cap2 = b.p_max * h2 + 1.0;
    std::vector<double> g1tab = user1_gamma_table(hp);

    SplitPoint best;
    for (int m1 = mhat; m1 <= m1_hi; ++m1) {
        double g1 = g1tab[m1 - mhat];
        if (!std::isfinite(g1)) continue;
        int m22 = d2 - m1;

        SurrogateSlot s21{approx::ApproxContext::make(m1, hp.eps21), double(m1), cap2};
        SurrogateSlot s22{approx::ApproxContext::make(m22, hp.eps22), double(m22), cap2};
        auto surrogate = [&](double n) {
            return split_energy_case2(m1, g1, s21.gamma(n), m22, s22.gamma(n2 - n),
                                      h1, h2);
        };
        GoldenResult gr = golden_section_integer(surrogate, n2, 0.5);

        bool golden_feasible = false;
        auto try_candidate = [&](int n) {
            double g21 = gamma_or_inf(n, hp.eps21, m1, cap2, mhat, b.sinr_tol);
            double g22 = gamma_or_inf(n2 - n, hp.eps22, m22, cap2, mhat, b.sinr_tol);
            if (!std::isfinite(g21) || !std::isfinite(g22)) return false;
            double p1 = g1 / h1;
            double p21 = g1 * g21 / h1 + g21 / h2;
            double p22 = g22 / h2;
            if (p1 + p21 > b.p_max || p22 > b.p_max) return false;
            double e = split_energy_case2(m1, g1, g21, m22, g22, h1, h2);
            SplitPoint cand{e, m1, n, m1, g1, g21, g22, p1, p21, p22};
            if (cand.better_than(best)) best = cand;
            return true;
        };
        golden_feasible = try_candidate(gr.n21);
        if (gr.n21 != 0) try_candidate(0);
        if (!golden_feasible) {
            auto phase1_ok = [&](int n) {
                double g21 = gamma_or_inf(n, hp.eps21, m1, cap2, mhat, b.sinr_tol);
                return std::isfinite(g21) &&
                       g1 / h1 + g1 * g21 / h1 + g21 / h2 <= b.p_max;
            };
            auto slot2_ok = [&](int n) {
                double g22 = gamma_or_inf(n2 - n, hp.eps22, m22, cap2, mhat, b.sinr_tol);
                return std::isfinite(g22) && g22 / h2 <= b.p_max;
            };
            int lo, hi;
            if (feasible_bit_interval(n2, phase1_ok, slot2_ok, lo, hi))
                try_candidate(std::clamp(gr.n21, lo, hi));
        }
    }

    return finish(2, best, noma::solve_noma(b), n2, d2);
}

SolveResult<HybridAllocation> solve_hybrid(const HybridParams& hp) {
    hp.validate();
    return hp.base.user1.gain <= hp.base.user2.gain ? solve_hybrid_case1(hp)
                                                    : solve_hybrid_case2(hp);
}

SolveResult<TdmaAllocation> tdma_solver(const ScenarioParams& sp) {
    sp.validate();
    {
        fbc::FbcParams p1(sp.user1.bits, sp.user1.error_prob, sp.min_blocklength);
        fbc::FbcParams p2(sp.user2.bits, sp.user2.error_prob, sp.min_blocklength);
        if (!fbc::monotonicity_holds(p1) || !fbc::monotonicity_holds(p2))
            throw std::domain_error("tdma_solver: energy-monotonicity condition fails");
    }

    int mhat = sp.min_blocklength;
    int m1_hi = std::min(sp.user1.deadline, sp.user2.deadline - mhat);
    if (m1_hi < mhat)
        return SolveResult<TdmaAllocation>::fail(InfeasibleReason::blocklength_cap);

    double h1 = sp.user1.gain, h2 = sp.user2.gain;
    double cap1 = sp.p_max * h1 + 1.0;
    double cap2 = sp.p_max * h2 + 1.0;
    fbc::FbcParams p1(sp.user1.bits, sp.user1.error_prob, mhat);
    fbc::FbcParams p2(sp.user2.bits, sp.user2.error_prob, mhat);

    bool found = false;
    TdmaAllocation best{};
    for (int m1 = mhat; m1 <= m1_hi; ++m1) {
        int m2 = sp.user2.deadline - m1;
        auto g1 = fbc::sinr_for_blocklength(m1, p1, cap1);
        auto g2 = fbc::sinr_for_blocklength(m2, p2, cap2);
        if (!g1 || !g2) continue;
        double q1 = *g1 / h1, q2 = *g2 / h2;
        if (q1 > sp.p_max || q2 > sp.p_max) continue; // per-slot power cap
        double e = m1 * q1 + m2 * q2;
        if (!found || e < best.energy) {
            best = TdmaAllocation{m1, m2, *g1, *g2, q1, q2, e};
            found = true;
        }
    }
    if (!found)
        return SolveResult<TdmaAllocation>::fail(InfeasibleReason::power_budget);
    return SolveResult<TdmaAllocation>::ok(best);
}

} // namespace fbnoma::hybrid
