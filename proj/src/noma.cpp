#include "fbnoma/noma.hpp"

#include "fbnoma/fbc.hpp"

#include <cmath>
#include <stdexcept>

namespace fbnoma::noma {

namespace {

void require_monotonicity(const ScenarioParams& sp) {
    fbc::FbcParams p1(sp.user1.bits, sp.user1.error_prob, sp.min_blocklength);
    fbc::FbcParams p2(sp.user2.bits, sp.user2.error_prob, sp.min_blocklength);
    if (!fbc::monotonicity_holds(p1) || !fbc::monotonicity_holds(p2))
        throw std::domain_error(
            "noma: Qinv(eps)/sqrt(N) exceeds the energy-monotonicity bound; deadline "
            "saturation is unproven for these parameters");
}

} // namespace

void ScenarioParams::validate() const {
    if (user1.bits < 1 || user2.bits < 1)
        throw std::invalid_argument("ScenarioParams: bits must be >= 1");
    if (!(user1.error_prob > 0.0 && user1.error_prob <= 0.5) ||
        !(user2.error_prob > 0.0 && user2.error_prob <= 0.5))
        throw std::invalid_argument("ScenarioParams: error_prob must lie in (0, 0.5]");
    if (!(user1.gain > 0.0 && user2.gain > 0.0))
        throw std::invalid_argument("ScenarioParams: gains must be > 0");
    if (min_blocklength < 1)
        throw std::invalid_argument("ScenarioParams: min_blocklength must be >= 1");
    if (user1.deadline < min_blocklength)
        throw std::invalid_argument("ScenarioParams: D1 must be >= min_blocklength");
    if (user1.deadline > user2.deadline)
        throw std::invalid_argument("ScenarioParams: requires D1 <= D2");
    if (!(p_max >= 0.0))
        throw std::invalid_argument("ScenarioParams: p_max must be >= 0");
    if (!(sinr_tol > 0.0))
        throw std::invalid_argument("ScenarioParams: sinr_tol must be > 0");
}

std::string_view scheme_name(Scheme s) {
    switch (s) {
        case Scheme::case1: return "case1";
        case Scheme::case2_full_block: return "case2-full-block";
        case Scheme::case2_short_block: return "case2-short-block";
    }
    return "?";
}

std::string_view reason_name(InfeasibleReason r) {
    switch (r) {
        case InfeasibleReason::none: return "none";
        case InfeasibleReason::power_budget: return "power-budget";
        case InfeasibleReason::sinr_product: return "sinr-product";
        case InfeasibleReason::blocklength_cap: return "blocklength-cap";
    }
    return "?";
}

std::optional<double> gamma_at(const UserSpec& u, double blocklength, double p_max,
                               int min_blocklength, double tol) {
    fbc::FbcParams p(u.bits, u.error_prob, min_blocklength);
    return fbc::sinr_for_blocklength(blocklength, p, p_max * u.gain + 1.0, tol);
}

SolveResult<NomaAllocation> solve_case1(const ScenarioParams& sp) {
    sp.validate();
    if (sp.user1.gain > sp.user2.gain)
        throw std::invalid_argument("solve_case1: requires h1 <= h2");
    require_monotonicity(sp);

    auto g1 = gamma_at(sp.user1, sp.user1.deadline, sp.p_max, sp.min_blocklength, sp.sinr_tol);
    auto g2 = gamma_at(sp.user2, sp.user2.deadline, sp.p_max, sp.min_blocklength, sp.sinr_tol);
    if (!g1 || !g2)
        return SolveResult<NomaAllocation>::fail(InfeasibleReason::power_budget);

    double h1 = sp.user1.gain, h2 = sp.user2.gain;
    double p1 = *g1 * *g2 / h2 + *g1 / h1;
    double p2 = *g2 / h2;
    if (p1 + p2 > sp.p_max)
        return SolveResult<NomaAllocation>::fail(InfeasibleReason::power_budget);

    NomaAllocation a{Scheme::case1, sp.user1.deadline, sp.user2.deadline,
                     *g1, *g2, p1, p2,
                     sp.user1.deadline * p1 + sp.user2.deadline * p2};
    return SolveResult<NomaAllocation>::ok(a);
}

bool feasibility_case1(const ScenarioParams& sp) {
    sp.validate();
    if (sp.user1.gain > sp.user2.gain)
        throw std::invalid_argument("feasibility_case1: requires h1 <= h2");
    auto g1 = gamma_at(sp.user1, sp.user1.deadline, sp.p_max, sp.min_blocklength, sp.sinr_tol);
    auto g2 = gamma_at(sp.user2, sp.user2.deadline, sp.p_max, sp.min_blocklength, sp.sinr_tol);
    if (!g1 || !g2) return false;
    return *g1 * *g2 / sp.user2.gain + *g1 / sp.user1.gain + *g2 / sp.user2.gain <=
           sp.p_max;
}

SolveResult<NomaAllocation> solve_case2_full(const ScenarioParams& sp) {
    sp.validate();
    if (!(sp.user1.gain > sp.user2.gain))
        throw std::invalid_argument("solve_case2_full: requires h1 > h2");
    require_monotonicity(sp);

    auto g1 = gamma_at(sp.user1, sp.user1.deadline, sp.p_max, sp.min_blocklength, sp.sinr_tol);
    auto g2 = gamma_at(sp.user2, sp.user2.deadline, sp.p_max, sp.min_blocklength, sp.sinr_tol);
    if (!g1 || !g2)
        return SolveResult<NomaAllocation>::fail(InfeasibleReason::power_budget);

    double prod = *g1 * *g2;
    if (prod >= 1.0)
        return SolveResult<NomaAllocation>::fail(InfeasibleReason::sinr_product);

    double h1 = sp.user1.gain, h2 = sp.user2.gain;
    double denom = h1 * h2 * (1.0 - prod);
    double p1 = (*g1 * h2 + prod * h1) / denom;
    double p2 = (*g2 * h1 + prod * h2) / denom;
    if (p1 + p2 > sp.p_max)
        return SolveResult<NomaAllocation>::fail(InfeasibleReason::power_budget);

    NomaAllocation a{Scheme::case2_full_block, sp.user1.deadline, sp.user2.deadline,
                     *g1, *g2, p1, p2,
                     sp.user1.deadline * p1 + sp.user2.deadline * p2};
    return SolveResult<NomaAllocation>::ok(a);
}

SolveResult<NomaAllocation> solve_case2_sic(const ScenarioParams& sp) {
    sp.validate();
    if (!(sp.user1.gain > sp.user2.gain))
        throw std::invalid_argument("solve_case2_sic: requires h1 > h2");
    require_monotonicity(sp);

    auto g1 = gamma_at(sp.user1, sp.user1.deadline, sp.p_max, sp.min_blocklength, sp.sinr_tol);
    auto g2 = gamma_at(sp.user2, sp.user1.deadline, sp.p_max, sp.min_blocklength, sp.sinr_tol);
    if (!g1 || !g2)
        return SolveResult<NomaAllocation>::fail(InfeasibleReason::power_budget);

    double h1 = sp.user1.gain, h2 = sp.user2.gain;
    double p1 = *g1 / h1;
    double p2 = *g1 * *g2 / h1 + *g2 / h2;
    if (p1 + p2 > sp.p_max)
        return SolveResult<NomaAllocation>::fail(InfeasibleReason::power_budget);

    NomaAllocation a{Scheme::case2_short_block, sp.user1.deadline, sp.user1.deadline,
                     *g1, *g2, p1, p2,
                     sp.user1.deadline * (p1 + p2)};
    return SolveResult<NomaAllocation>::ok(a);
}

SolveResult<NomaAllocation> solve_noma(const ScenarioParams& sp) {
    sp.validate();
    if (sp.user1.gain <= sp.user2.gain) return solve_case1(sp); // h1 = h2 ties -> case 1

    auto full = solve_case2_full(sp);
    auto sic = solve_case2_sic(sp);
    if (!full.feasible()) return sic.feasible() ? sic : full;
    if (!sic.feasible()) return full;
    // equal-energy ties prefer the SIC scheme
    return sic.value().energy <= full.value().energy ? sic : full;
}

double compose_error(double eps_a, double eps_b) {
    if (!(eps_a >= 0.0 && eps_a < 1.0) || !(eps_b >= 0.0 && eps_b < 1.0))
        throw std::domain_error("compose_error: probabilities must lie in [0,1)");
    return eps_a + eps_b - eps_a * eps_b;
}

namespace {

// Power pair induced by the case-1 rate constraints at blocklengths
// (min(m2,D1), m2); nullopt when a SINR is unreachable below the cap.
std::optional<double> latency_power_sum(const ScenarioParams& sp, int m2) {
    int m1 = std::min(m2, sp.user1.deadline);
    auto g1 = gamma_at(sp.user1, m1, sp.p_max, sp.min_blocklength, sp.sinr_tol);
    auto g2 = gamma_at(sp.user2, m2, sp.p_max, sp.min_blocklength, sp.sinr_tol);
    if (!g1 || !g2) return std::nullopt;
    return *g1 * *g2 / sp.user2.gain + *g1 / sp.user1.gain + *g2 / sp.user2.gain;
}

} // namespace

SolveResult<NomaAllocation> minimize_latency(const ScenarioParams& sp, int m2_cap) {
    sp.validate();
    if (sp.user1.gain > sp.user2.gain)
        throw std::invalid_argument("minimize_latency: requires h1 <= h2");
    if (m2_cap < sp.min_blocklength)
        throw std::invalid_argument("minimize_latency: cap below min_blocklength");
    require_monotonicity(sp);

    auto feasible = [&](int m2) {
        auto s = latency_power_sum(sp, m2);
        return s && *s <= sp.p_max;
    };

    int lo = sp.min_blocklength; // candidate answers live in [lo, m2_cap]
    if (!feasible(m2_cap))
        return SolveResult<NomaAllocation>::fail(InfeasibleReason::blocklength_cap);

    int m2;
    if (feasible(lo)) {
        m2 = lo;
    } else {
        int bad = lo, good = m2_cap; // feasibility is monotone in m2
        while (good - bad > 1) {
            int mid = bad + (good - bad) / 2;
            if (feasible(mid))
                good = mid;
            else
                bad = mid;
        }
        m2 = good;
    }

    int m1 = std::min(m2, sp.user1.deadline);
    auto g1 = gamma_at(sp.user1, m1, sp.p_max, sp.min_blocklength, sp.sinr_tol);
    auto g2 = gamma_at(sp.user2, m2, sp.p_max, sp.min_blocklength, sp.sinr_tol);
    double h1 = sp.user1.gain, h2 = sp.user2.gain;
    double p1 = *g1 * *g2 / h2 + *g1 / h1;
    double p2 = *g2 / h2;
    NomaAllocation a{Scheme::case1, m1, m2, *g1, *g2, p1, p2, m1 * p1 + m2 * p2};
    return SolveResult<NomaAllocation>::ok(a);
}

} // namespace fbnoma::noma
