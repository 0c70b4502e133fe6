#ifndef FBNOMA_MONTECARLO_HPP
#define FBNOMA_MONTECARLO_HPP

#include "fbnoma/channel.hpp"
#include "fbnoma/hybrid.hpp"
#include "fbnoma/noma.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

// Monte-Carlo drivers for the comparative experiments: infeasibility
// probabilities and mean-energy sweeps over channel realizations.  The
// implicit SINR roots are channel-independent, so they are computed once
// per sweep point; each realization then reduces to closed-form power
// checks.  Realizations are independent tasks (OpenMP over fixed-size
// blocks, block sums merged in index order), and a serial reference of the
// infeasibility kernel is kept for testing; results are bit-identical for
// any thread count.

namespace fbnoma::sim {

enum class SchemeId { noma, tdma, hybrid, shannon_noma };

std::string_view scheme_id_name(SchemeId s);
std::optional<SchemeId> scheme_id_from(std::string_view name);

enum class SweepAxis { d1, pmax_dbm, packets };
enum class Condition { all, h1_less, h1_geq };

struct ExperimentConfig {
    std::vector<SchemeId> schemes{SchemeId::noma, SchemeId::tdma};
    SweepAxis axis = SweepAxis::d1;
    std::vector<double> values{640.0};
    std::uint64_t realizations = 1000;
    std::uint64_t seed = 1;
    Condition condition = Condition::all;

    int n1 = 256, n2 = 256;      // bits per user (packets axis scales these)
    int d1 = 640, d2 = 640;      // symbols (d1 axis overrides d1)
    double eps1 = 1e-6, eps2 = 1e-6;
    double eps21 = 5e-7, eps22 = 5e-7;
    double p_max_w = 10.0;       // pmax_dbm axis overrides this
    int min_blocklength = 100;
    ChannelModel channel{};
    bool polar_loss = false;     // 0.25 dB SNR-loss post-multiplier on energies

    void validate() const;
};

struct InfeasibilityRow {
    double sweep_value;
    SchemeId scheme;
    std::uint64_t trials;        // realizations passing the condition filter
    std::uint64_t infeasible;
    double probability;
    double std_error;            // binomial
};

std::vector<InfeasibilityRow> estimate_infeasibility(const ExperimentConfig& cfg);
std::vector<InfeasibilityRow> estimate_infeasibility_serial(const ExperimentConfig& cfg);

struct EnergyRow {
    double sweep_value;
    SchemeId scheme;
    double mean_energy;          // over feasible draws; NaN when none
    std::uint64_t feasible;
    std::uint64_t trials;
};

struct RealizationRecord {
    double sweep_value;
    SchemeId scheme;
    std::uint64_t realization;
    double h1, h2;
    bool feasible;
    double energy;               // NaN when infeasible
};

// Mean energies per (sweep value, scheme), averaged over feasible draws;
// infeasible draws are excluded and counted.  Optionally emits the raw
// per-realization records.
std::vector<EnergyRow> energy_sweep(const ExperimentConfig& cfg,
                                    std::vector<RealizationRecord>* records = nullptr);

// solve_noma with both error probabilities forced to 0.5, i.e. the
// Shannon-capacity allocation (comparison baseline only).
noma::SolveResult<noma::NomaAllocation> shannon_baseline(const noma::ScenarioParams& sp);

} // namespace fbnoma::sim

#endif
