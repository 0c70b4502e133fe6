#ifndef FBNOMA_HYBRID_HPP
#define FBNOMA_HYBRID_HPP

#include "fbnoma/noma.hpp"

#include <functional>

// Split-packet hybrid NOMA/TDMA scheme.  User 2's packet is split into
// N21 bits superposed with user 1's codeword and N22 = N2 - N21 bits sent
// in a clean slot; N21 = 0 degenerates to TDMA and N22 = 0 to pure NOMA.
//
//   case 1 (h1 <= h2): receiver 2 performs SIC.  Slots (m1 | m21) + m22
//     with m1 <= min(D1, m21) and m21 + m22 = D2.
//   case 2 (h1 >  h2): receiver 1 performs SIC, m21 = m1, m1 + m22 <= D2.
//
// Two solvers: a 3-D exhaustive benchmark over (N21, m1, m21) with exact
// SINR maps (OpenMP over the m21 axis, serial reference kept for testing),
// and the efficient scheme: outer blocklength scan + golden-section over
// the bit split driven by the concave surrogate, with the winning integer
// re-scored under the exact maps.

namespace fbnoma::hybrid {

using noma::InfeasibleReason;
using noma::ScenarioParams;
using noma::SolveResult;

struct HybridParams {
    ScenarioParams base;   // user2.error_prob is the pure-NOMA eps2
    double eps21 = 5e-7;   // error target of the superposed part
    double eps22 = 5e-7;   // error target of the clean slot

    void validate() const;
};

enum class HybridMode { split, pure_noma };

struct HybridAllocation {
    int case_tag;              // 1 (h1 <= h2) or 2 (h1 > h2)
    HybridMode mode;
    noma::Scheme noma_scheme;  // meaningful when mode == pure_noma
    int n21, n22;
    int m1, m21, m22;          // zero-bit slots are dropped (length 0, power 0)
    double sinr1, sinr21, sinr22;
    double p1, p21, p22;
    double energy;             // watt-symbols
};

struct Candidate {
    int n21, m1, m21, m22;
};

// Power-box membership: recovers (p1, p21, p22) from the exact SINR
// maps (case-1 formulas) and checks the power box.  False on any SINR-map
// failure.
bool in_feasible_set_H(const Candidate& c, const HybridParams& hp);

// 3-D exhaustive benchmark for case 1, m21 + m22 = D2 enforced.  Includes
// the pure-NOMA endpoint (N22 = 0) via solve_case1.  Deterministic
// tie-break: smallest energy, then m21, then N21, then m1.
SolveResult<HybridAllocation> solve_hybrid_exhaustive(const HybridParams& hp);
SolveResult<HybridAllocation> solve_hybrid_exhaustive_serial(const HybridParams& hp);

// 2-D exhaustive benchmark for case 2 over (m1, N21), m21 = m1.
SolveResult<HybridAllocation> solve_hybrid_case2_exhaustive(const HybridParams& hp);

enum class SinrMap { exact, surrogate };

// Energy of one case-1 scan point; +inf when a rate demand is infeasible
// under the SINR cap.  case a pins m1 = m21 (valid for m21 <= D1), case b
// pins m1 = D1 (valid for m21 >= D1); they agree at m21 = D1.
double hybrid_objective_case_a(double n21, int m21, const HybridParams& hp, SinrMap map);
double hybrid_objective_case_b(double n21, int m21, const HybridParams& hp, SinrMap map);
// Case-2 scan point: m21 = m1, m22 = D2 - m1.
double hybrid_objective_case2(double n21, int m1, const HybridParams& hp, SinrMap map);

struct GoldenResult {
    int n21;
    double energy;   // objective at n21 (same map as the search)
    int iterations;
};

// Golden-section minimization (ratio 0.618) of a unimodal objective over
// continuous n21 in [0, n2-1], stopping at interval width eps0, then the
// floor/ceil integer candidates are compared.  n2 = 1 returns n21 = 0.
GoldenResult golden_section_integer(const std::function<double(double)>& objective,
                                    int n2, double eps0 = 0.5);

enum class ObjectiveCase { case_a, case_b };

// Bit-split search at one scan point: golden-section over the
// surrogate-map objective, with the empty-slot endpoint scored too.
GoldenResult golden_section_bits(int m21, ObjectiveCase which,
                                 const HybridParams& hp, double eps0 = 0.5);

// Efficient solvers (outer blocklength scan + golden section on the
// surrogate, exact re-scoring, power filtering; pure-NOMA endpoint and the
// N21 = 0 TDMA endpoint always included).
SolveResult<HybridAllocation> solve_hybrid_case1(const HybridParams& hp);
SolveResult<HybridAllocation> solve_hybrid_case2(const HybridParams& hp);
SolveResult<HybridAllocation> solve_hybrid(const HybridParams& hp);

struct TdmaAllocation {
    int m1, m2;
    double sinr1, sinr2;
    double p1, p2;     // per-slot powers, each capped by p_max
    double energy;
};

// Orthogonal two-slot baseline: m2 = D2 - m1, integer scan of m1.
SolveResult<TdmaAllocation> tdma_solver(const ScenarioParams& sp);

} // namespace fbnoma::hybrid

#endif
