// Benchmark comparing the OpenMP kernels against their serial references:
// the 3-D exhaustive hybrid search and the Monte-Carlo infeasibility
// estimator.  Verifies that both produce identical results before timing.

#include "fbnoma/hybrid.hpp"
#include "fbnoma/montecarlo.hpp"

#include <cstdio>
#include <cstdlib>
#include <omp.h>

using namespace fbnoma;

namespace {

int failures = 0;

void check(bool ok, const char* what) {
    if (!ok) {
        std::printf("MISMATCH: %s\n", what);
        ++failures;
    }
}

void bench_exhaustive() {
    hybrid::HybridParams hp;
    hp.base.user1 = {64, 220, 1e-6, 40.0};
    hp.base.user2 = {64, 400, 1e-6, 90.0};
    hp.base.p_max = 10.0;
    hp.eps21 = 5e-7;
    hp.eps22 = 5e-7;

    double t0 = omp_get_wtime();
    auto serial = hybrid::solve_hybrid_exhaustive_serial(hp);
    double t1 = omp_get_wtime();
    auto parallel = hybrid::solve_hybrid_exhaustive(hp);
    double t2 = omp_get_wtime();

    check(serial.feasible() == parallel.feasible(), "exhaustive feasibility");
    if (serial.feasible() && parallel.feasible()) {
        const auto& a = serial.value();
        const auto& b = parallel.value();
        check(a.energy == b.energy && a.n21 == b.n21 && a.m1 == b.m1 &&
                  a.m21 == b.m21 && a.m22 == b.m22,
              "exhaustive allocation");
    }
    std::printf("exhaustive hybrid search  serial %8.3f s   openmp %8.3f s   speedup %.2fx\n",
                t1 - t0, t2 - t1, (t1 - t0) / (t2 - t1));
}

void bench_infeasibility(std::uint64_t n) {
    sim::ExperimentConfig cfg;
    cfg.schemes = {sim::SchemeId::noma, sim::SchemeId::tdma, sim::SchemeId::hybrid};
    cfg.axis = sim::SweepAxis::pmax_dbm;
    cfg.values = {30.0, 35.0, 40.0};
    cfg.realizations = n;
    cfg.seed = 99;
    cfg.d1 = 384;
    cfg.d2 = 640;

    double t0 = omp_get_wtime();
    auto serial = sim::estimate_infeasibility_serial(cfg);
    double t1 = omp_get_wtime();
    auto parallel = sim::estimate_infeasibility(cfg);
    double t2 = omp_get_wtime();

    check(serial.size() == parallel.size(), "row count");
    for (std::size_t i = 0; i < serial.size() && i < parallel.size(); ++i)
        check(serial[i].infeasible == parallel[i].infeasible &&
                  serial[i].trials == parallel[i].trials,
              "infeasibility counts");
    std::printf("infeasibility mc (%llu)   serial %8.3f s   openmp %8.3f s   speedup %.2fx\n",
                static_cast<unsigned long long>(n), t1 - t0, t2 - t1,
                (t1 - t0) / (t2 - t1));
}

} // namespace

int main(int argc, char** argv) {
    std::uint64_t n = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1000000;
    std::printf("threads: %d\n", omp_get_max_threads());
    bench_exhaustive();
    bench_infeasibility(n);
    if (failures) {
        std::printf("%d mismatches\n", failures);
        return 1;
    }
    std::printf("serial and parallel kernels agree\n");
    return 0;
}
