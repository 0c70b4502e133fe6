#include "fbnoma/montecarlo.hpp"

#include "fbnoma/fbc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fbnoma::sim {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double gamma_unbounded(int bits, double eps, double m, int mhat) {
    fbc::FbcParams p(bits, eps, mhat);
    auto g = fbc::sinr_for_blocklength(m, p);
    if (!g) throw std::runtime_error("montecarlo: SINR root not bracketed");
    return *g;
}

struct Neumaier {
    double s = 0.0, c = 0.0;
    void add(double x) {
        double t = s + x;
        c += (std::abs(s) >= std::abs(x)) ? (s - t) + x : (x - t) + s;
        s = t;
    }
    double total() const { return s + c; }
};

struct Eval {
    bool feasible;
    double energy;
};

// Everything channel-independent for one sweep point.
struct SchemeEvaluator {
    int n1, n2, d1, d2, mhat;
    double pmax;
    double eps1, eps2;
    hybrid::HybridParams hyb_template; // gains filled per draw

    // FBC and Shannon SINR roots at the deadline blocklengths
    double fbc1_d1, fbc2_d2, fbc2_d1;
    double sh1_d1, sh2_d2, sh2_d1;

    // TDMA tables over m1 in [mhat, t_hi]: a decreasing, b increasing
    int t_hi;
    std::vector<double> tdma_a, tdma_b;     // FBC
    std::vector<double> tdma_a_sh, tdma_b_sh;

    static double shannon_gamma(int bits, double m) {
        return std::exp2(bits / m) - 1.0;
    }

    SchemeEvaluator(const ExperimentConfig& cfg, double value) {
        mhat = cfg.min_blocklength;
        n1 = cfg.n1;
        n2 = cfg.n2;
        d1 = cfg.d1;
        d2 = cfg.d2;
        pmax = cfg.p_max_w;
        eps1 = cfg.eps1;
        eps2 = cfg.eps2;
        switch (cfg.axis) {
            case SweepAxis::d1:
                d1 = static_cast<int>(value);
                break;
            case SweepAxis::pmax_dbm:
                pmax = std::pow(10.0, (value - 30.0) / 10.0);
                break;
            case SweepAxis::packets: {
                int k = static_cast<int>(value);
                if (k < 1 || k != value)
                    throw std::invalid_argument("packets axis needs integer values >= 1");
                n1 = cfg.n1 * k;
                n2 = cfg.n2 * k;
                break;
            }
        }
        if (d1 < mhat || d1 > d2)
            throw std::invalid_argument("sweep: d1 out of [min_blocklength, d2]");

        fbc::FbcParams p1(n1, eps1, mhat), p2(n2, eps2, mhat);
        if (!fbc::monotonicity_holds(p1) || !fbc::monotonicity_holds(p2))
            throw std::domain_error("sweep: energy-monotonicity condition fails");

        fbc1_d1 = gamma_unbounded(n1, eps1, d1, mhat);
        fbc2_d2 = gamma_unbounded(n2, eps2, d2, mhat);
        fbc2_d1 = gamma_unbounded(n2, eps2, d1, mhat);
        sh1_d1 = shannon_gamma(n1, d1);
        sh2_d2 = shannon_gamma(n2, d2);
        sh2_d1 = shannon_gamma(n2, d1);

        t_hi = std::min(d1, d2 - mhat);
        int len = std::max(0, t_hi - mhat + 1);
        tdma_a.resize(len);
        tdma_b.resize(len);
        tdma_a_sh.resize(len);
        tdma_b_sh.resize(len);
        for (int m = mhat; m <= t_hi; ++m) {
            tdma_a[m - mhat] = gamma_unbounded(n1, eps1, m, mhat);
            tdma_b[m - mhat] = gamma_unbounded(n2, eps2, d2 - m, mhat);
            tdma_a_sh[m - mhat] = shannon_gamma(n1, m);
            tdma_b_sh[m - mhat] = shannon_gamma(n2, d2 - m);
        }

        hyb_template.base.user1 = {n1, d1, eps1, 1.0};
        hyb_template.base.user2 = {n2, d2, eps2, 1.0};
        hyb_template.base.p_max = pmax;
        hyb_template.base.min_blocklength = mhat;
        hyb_template.eps21 = cfg.eps21;
        hyb_template.eps22 = cfg.eps22;
    }

    Eval noma_from_roots(double g1, double g2_long, double g2_short, double h1,
                         double h2) const {
        if (h1 <= h2) {
            double p1 = g1 * g2_long / h2 + g1 / h1;
            double p2 = g2_long / h2;
            if (p1 + p2 > pmax) return {false, kNan};
            return {true, d1 * p1 + d2 * p2};
        }
        bool full_ok = false;
        double e_full = kNan;
        double prod = g1 * g2_long;
        if (prod < 1.0) {
            double denom = h1 * h2 * (1.0 - prod);
            double p1 = (g1 * h2 + prod * h1) / denom;
            double p2 = (g2_long * h1 + prod * h2) / denom;
            if (p1 + p2 <= pmax) {
                full_ok = true;
                e_full = d1 * p1 + d2 * p2;
            }
        }
        double p1s = g1 / h1;
        double p2s = g1 * g2_short / h1 + g2_short / h2;
        bool sic_ok = p1s + p2s <= pmax;
        double e_sic = sic_ok ? d1 * (p1s + p2s) : kNan;
        if (!full_ok && !sic_ok) return {false, kNan};
        if (full_ok && sic_ok) return {true, e_sic <= e_full ? e_sic : e_full};
        return {true, full_ok ? e_full : e_sic};
    }

    Eval noma(double h1, double h2) const {
        return noma_from_roots(fbc1_d1, fbc2_d2, fbc2_d1, h1, h2);
    }
    Eval shannon(double h1, double h2) const {
        return noma_from_roots(sh1_d1, sh2_d2, sh2_d1, h1, h2);
    }

    // Smallest m1 whose user-1 SINR fits the per-slot cap and largest m1
    // whose user-2 slot fits; decreasing/increasing tables, binary search.
    bool tdma_band(const std::vector<double>& a, const std::vector<double>& b,
                   double h1, double h2, int& lo, int& hi) const {
        if (a.empty()) return false;
        double cap1 = pmax * h1, cap2 = pmax * h2;
        // first index with a[i] <= cap1
        auto it = std::lower_bound(a.begin(), a.end(), cap1,
                                   [](double x, double v) { return x > v; });
        if (it == a.end()) return false;
        lo = static_cast<int>(it - a.begin());
        // last index with b[i] <= cap2
        auto jt = std::upper_bound(b.begin(), b.end(), cap2);
        if (jt == b.begin()) return false;
        hi = static_cast<int>(jt - b.begin()) - 1;
        return lo <= hi;
    }

    Eval tdma_from(const std::vector<double>& a, const std::vector<double>& b,
                   double h1, double h2) const {
        int lo, hi;
        if (!tdma_band(a, b, h1, h2, lo, hi)) return {false, kNan};
        double best = std::numeric_limits<double>::infinity();
        for (int i = lo; i <= hi; ++i) {
            int m1 = mhat + i;
            double e = m1 * a[i] / h1 + (d2 - m1) * b[i] / h2;
            if (e < best) best = e;
        }
        return {true, best};
    }

    Eval tdma(double h1, double h2) const { return tdma_from(tdma_a, tdma_b, h1, h2); }

    bool tdma_feasible(double h1, double h2) const {
        int lo, hi;
        return tdma_band(tdma_a, tdma_b, h1, h2, lo, hi);
    }

    bool hybrid_feasible(double h1, double h2) const {
        // NOMA and TDMA are special cases of the hybrid scheme; exact
        // membership would need a 2-D scan per draw.
        return noma(h1, h2).feasible || tdma_feasible(h1, h2);
    }

    Eval hybrid(double h1, double h2) const {
        hybrid::HybridParams hp = hyb_template;
        hp.base.user1.gain = h1;
        hp.base.user2.gain = h2;
        auto r = hybrid::solve_hybrid(hp);
        if (!r.feasible()) return {false, kNan};
        return {true, r.value().energy};
    }

    Eval evaluate(SchemeId s, double h1, double h2) const {
        switch (s) {
            case SchemeId::noma: return noma(h1, h2);
            case SchemeId::tdma: return tdma(h1, h2);
            case SchemeId::shannon_noma: return shannon(h1, h2);
            case SchemeId::hybrid: return hybrid(h1, h2);
        }
        return {false, kNan};
    }

    bool infeasible(SchemeId s, double h1, double h2) const {
        switch (s) {
            case SchemeId::noma: return !noma(h1, h2).feasible;
            case SchemeId::tdma: return !tdma_feasible(h1, h2);
            case SchemeId::shannon_noma: return !shannon(h1, h2).feasible;
            case SchemeId::hybrid: return !hybrid_feasible(h1, h2);
        }
        return true;
    }
};

bool passes(Condition c, double h1, double h2) {
    switch (c) {
        case Condition::all: return true;
        case Condition::h1_less: return h1 < h2;
        case Condition::h1_geq: return h1 >= h2;
    }
    return true;
}

constexpr std::uint64_t kBlock = 8192;

std::vector<InfeasibilityRow> estimate_impl(const ExperimentConfig& cfg,
                                            bool parallel) {
    cfg.validate();
    std::vector<InfeasibilityRow> rows;
    const int ns = static_cast<int>(cfg.schemes.size());

    for (double value : cfg.values) {
        SchemeEvaluator ev(cfg, value);
        std::uint64_t nblocks = (cfg.realizations + kBlock - 1) / kBlock;
        // per block: [trials, infeasible per scheme...]
        std::vector<std::uint64_t> counts(nblocks * (ns + 1), 0);

#pragma omp parallel for schedule(dynamic, 1) if (parallel)
        for (std::int64_t blk = 0; blk < static_cast<std::int64_t>(nblocks); ++blk) {
            std::uint64_t r0 = blk * kBlock;
            std::uint64_t r1 = std::min(cfg.realizations, r0 + kBlock);
            std::uint64_t* out = counts.data() + blk * (ns + 1);
            for (std::uint64_t r = r0; r < r1; ++r) {
                auto [h1, h2] = sample_channel(cfg.channel, cfg.seed, r);
                if (!passes(cfg.condition, h1, h2)) continue;
                ++out[0];
                for (int s = 0; s < ns; ++s)
                    if (ev.infeasible(cfg.schemes[s], h1, h2)) ++out[1 + s];
            }
        }

        std::uint64_t trials = 0;
        std::vector<std::uint64_t> bad(ns, 0);
        for (std::uint64_t blk = 0; blk < nblocks; ++blk) {
            trials += counts[blk * (ns + 1)];
            for (int s = 0; s < ns; ++s) bad[s] += counts[blk * (ns + 1) + 1 + s];
        }
        for (int s = 0; s < ns; ++s) {
            double p = trials ? static_cast<double>(bad[s]) / trials : 0.0;
            double se = trials ? std::sqrt(p * (1.0 - p) / trials) : 0.0;
            rows.push_back({value, cfg.schemes[s], trials, bad[s], p, se});
        }
    }
    return rows;
}

} // namespace

std::string_view scheme_id_name(SchemeId s) {
    switch (s) {
        case SchemeId::noma: return "noma";
        case SchemeId::tdma: return "tdma";
        case SchemeId::hybrid: return "hybrid";
        case SchemeId::shannon_noma: return "shannon-noma";
    }
    return "?";
}

std::optional<SchemeId> scheme_id_from(std::string_view name) {
    if (name == "noma") return SchemeId::noma;
    if (name == "tdma") return SchemeId::tdma;
    if (name == "hybrid") return SchemeId::hybrid;
    if (name == "shannon-noma" || name == "shannon") return SchemeId::shannon_noma;
    return std::nullopt;
}

void ExperimentConfig::validate() const {
    if (schemes.empty()) throw std::invalid_argument("config: no schemes");
    if (values.empty()) throw std::invalid_argument("config: no sweep values");
    if (realizations < 1) throw std::invalid_argument("config: realizations < 1");
    if (n1 < 1 || n2 < 1) throw std::invalid_argument("config: bits must be >= 1");
    if (min_blocklength < 1) throw std::invalid_argument("config: min_blocklength < 1");
    if (d2 < min_blocklength) throw std::invalid_argument("config: d2 < min_blocklength");
    if (!(p_max_w >= 0.0)) throw std::invalid_argument("config: p_max < 0");
    if (!(channel.noise_w > 0.0)) throw std::invalid_argument("config: noise <= 0");
}

std::vector<InfeasibilityRow> estimate_infeasibility(const ExperimentConfig& cfg) {
    return estimate_impl(cfg, true);
}

std::vector<InfeasibilityRow> estimate_infeasibility_serial(const ExperimentConfig& cfg) {
    return estimate_impl(cfg, false);
}

std::vector<EnergyRow> energy_sweep(const ExperimentConfig& cfg,
                                    std::vector<RealizationRecord>* records) {
    cfg.validate();
    const int ns = static_cast<int>(cfg.schemes.size());
    const double energy_scale = cfg.polar_loss ? std::pow(10.0, 0.025) : 1.0;
    std::vector<EnergyRow> rows;
    if (records) {
        records->clear();
        records->resize(cfg.values.size() * ns * cfg.realizations);
    }

    for (std::size_t vi = 0; vi < cfg.values.size(); ++vi) {
        double value = cfg.values[vi];
        SchemeEvaluator ev(cfg, value);
        std::uint64_t nblocks = (cfg.realizations + kBlock - 1) / kBlock;
        struct BlockAcc {
            Neumaier sum;
            std::uint64_t feasible = 0, trials = 0;
        };
        std::vector<BlockAcc> acc(nblocks * ns);

#pragma omp parallel for schedule(dynamic, 1)
        for (std::int64_t blk = 0; blk < static_cast<std::int64_t>(nblocks); ++blk) {
            std::uint64_t r0 = blk * kBlock;
            std::uint64_t r1 = std::min(cfg.realizations, r0 + kBlock);
            for (std::uint64_t r = r0; r < r1; ++r) {
                auto [h1, h2] = sample_channel(cfg.channel, cfg.seed, r);
                bool ok = passes(cfg.condition, h1, h2);
                for (int s = 0; s < ns; ++s) {
                    BlockAcc& a = acc[blk * ns + s];
                    Eval e{false, kNan};
                    if (ok) {
                        ++a.trials;
                        e = ev.evaluate(cfg.schemes[s], h1, h2);
                        if (e.feasible) {
                            ++a.feasible;
                            a.sum.add(e.energy);
                        }
                    }
                    if (records) {
                        (*records)[(vi * ns + s) * cfg.realizations + r] = {
                            value,    cfg.schemes[s],
                            r,        h1,
                            h2,       e.feasible,
                            e.feasible ? e.energy * energy_scale : kNan};
                    }
                }
            }
        }

        for (int s = 0; s < ns; ++s) {
            Neumaier total;
            std::uint64_t feasible = 0, trials = 0;
            for (std::uint64_t blk = 0; blk < nblocks; ++blk) {
                const BlockAcc& a = acc[blk * ns + s];
                total.add(a.sum.total());
                feasible += a.feasible;
                trials += a.trials;
            }
            double mean = feasible ? total.total() / feasible * energy_scale : kNan;
            rows.push_back({value, cfg.schemes[s], mean, feasible, trials});
        }
    }
    return rows;
}

noma::SolveResult<noma::NomaAllocation> shannon_baseline(const noma::ScenarioParams& sp) {
    noma::ScenarioParams s = sp;
    s.user1.error_prob = 0.5;
    s.user2.error_prob = 0.5;
    return noma::solve_noma(s);
}

} // namespace fbnoma::sim
