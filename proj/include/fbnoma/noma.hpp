#ifndef FBNOMA_NOMA_HPP
#define FBNOMA_NOMA_HPP

#include <optional>
#include <string_view>

// Semi-analytic energy minimization for the two-user downlink under the
// finite-blocklength rate model.  User 1 is the short-deadline user
// (D1 <= D2).  Three schemes, dispatched on the gain ordering:
//
//   case 1        h1 <= h2, receiver 2 cancels user 1's codeword (SIC)
//   case 2 full   h1 >  h2, both receivers treat interference as noise,
//                 user 2 rides the full deadline D2
//   case 2 sic    h1 >  h2, receiver 1 cancels user 2 (SIC), which forces
//                 m2 <= m1 <= D1
//
// Under the energy-monotonicity condition the optimal blocklengths
// saturate the deadlines and the optimal SINRs are the implicit-function
// values Gamma(D); powers follow in closed form.  Solvers refuse (throw)
// when the monotonicity condition fails, since the saturation argument is
// unproven there.

namespace fbnoma::noma {

struct UserSpec {
    int bits;           // N >= 1
    int deadline;       // D, symbols
    double error_prob;  // block error target
    double gain;        // normalized |h|^2/sigma^2, linear, > 0
};

struct ScenarioParams {
    UserSpec user1;
    UserSpec user2;
    double p_max;             // watts, >= 0
    int min_blocklength = 100;
    double sinr_tol = 1e-9;   // bisection bracket width on SINR

    void validate() const;    // throws std::invalid_argument
};

enum class Scheme { case1, case2_full_block, case2_short_block };

std::string_view scheme_name(Scheme s);

struct NomaAllocation {
    Scheme scheme;
    int m1, m2;
    double sinr1, sinr2;
    double p1, p2;      // watts
    double energy;      // watt-symbols, m1*p1 + m2*p2
};

enum class InfeasibleReason {
    none,
    power_budget,     // required total power exceeds p_max (closed-form sum test,
                      //   also covers SINRs unreachable below p_max*h + 1)
    sinr_product,     // case 2 full: gamma1*gamma2 >= 1, no power pair exists
    blocklength_cap,  // latency minimization: infeasible at the search cap
};

std::string_view reason_name(InfeasibleReason r);

template <class Alloc>
struct SolveResult {
    std::optional<Alloc> allocation;
    InfeasibleReason reason = InfeasibleReason::none;

    bool feasible() const { return allocation.has_value(); }
    const Alloc& value() const { return *allocation; }

    static SolveResult ok(Alloc a) { return {std::move(a), InfeasibleReason::none}; }
    static SolveResult fail(InfeasibleReason r) { return {std::nullopt, r}; }
};

// Exact implicit SINR for one user at real blocklength m, bracket capped at
// p_max*gain + 1 (Algorithm-1 bracket).  nullopt means the rate cannot be
// met below the cap, which always implies a power-budget violation.
std::optional<double> gamma_at(const UserSpec& u, double blocklength, double p_max,
                               int min_blocklength, double tol = 1e-9);

// Optimal allocation for h1 <= h2: deadlines saturated, powers closed-form.
SolveResult<NomaAllocation> solve_case1(const ScenarioParams& sp);

// Closed-form power-sum feasibility test, equivalent to solve_case1 succeeding.
bool feasibility_case1(const ScenarioParams& sp);

// h1 > h2, both receivers treat interference as noise.
SolveResult<NomaAllocation> solve_case2_full(const ScenarioParams& sp);

// h1 > h2, SIC at receiver 1, which forces m1 = m2 = D1.
SolveResult<NomaAllocation> solve_case2_sic(const ScenarioParams& sp);

// Dispatch: case 1 when h1 <= h2 (ties included), otherwise the cheaper
// feasible of the two case-2 schemes, preferring SIC on exact ties.
SolveResult<NomaAllocation> solve_noma(const ScenarioParams& sp);

// Union bound for chained decodings: a + b - a*b.
double compose_error(double eps_a, double eps_b);

// Latency minimization (h1 <= h2): smallest integer m2 whose induced power
// pair fits p_max, with m1 = min(m2, D1).  Feasibility is monotone in m2,
// so the result carries a bracketing certificate: feasible at m2*, not at
// m2*-1.  Infeasible (blocklength_cap) if even m2 = m2_cap fails.
SolveResult<NomaAllocation> minimize_latency(const ScenarioParams& sp,
                                             int m2_cap = 1000000);

} // namespace fbnoma::noma

#endif
