#include "increff/sensitivity.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <fstream>

#include "increff/errors.hpp"
#include "increff/plugin.hpp"

namespace increff {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

double t4_quantile(double u) {
    static const boost::math::students_t dist(4.0);
    return boost::math::quantile(dist, u);
}

}  // namespace

SensitivityReport sensitivity_bound(const OracleDgp& oracle, int mc_n,
                                    std::uint64_t seed) {
    if (mc_n < 2) throw ConfigError("InvalidParams: mc_n must be >= 2");
    if (!oracle.row_sampler)
        throw OracleError("OracleUnavailable: scenario lacks a row sampler");

    double sum_sp = 0.0, sum_est = 0.0, sum_diff2 = 0.0;
    double sum_bound = 0.0, sum_bound2 = 0.0;
    const std::uint64_t row_base = splitmix64(seed) | (1ULL << 62);

#pragma omp parallel for reduction(+ : sum_sp, sum_est, sum_diff2, sum_bound, \
                                       sum_bound2) schedule(static)
    for (int i = 0; i < mc_n; ++i) {
        const DrawnRow r =
            oracle.row_sampler(row_base + static_cast<std::uint64_t>(i));
        const double h = r.has_h ? r.h : 0.0;

        const double v_sp = oracle.dm_dt(r.t, r.x, h);
        double v_est;
        if (oracle.has_dm_obs()) {
            v_est = oracle.dm_obs(r.t, r.x);
        } else {
            const double step = 1e-4 * (1.0 + std::abs(r.t));
            v_est = (oracle.m_obs(r.t + step, r.x) -
                     oracle.m_obs(r.t - step, r.x)) /
                    (2.0 * step);
        }
        const double v_bound =
            std::abs(oracle.m_obs(r.t, r.x) - oracle.m(r.t, r.x, h)) *
            std::abs(oracle.score_obs(r.t, r.x) -
                     oracle.score_full(r.t, r.x, h));

        sum_sp += v_sp;
        sum_est += v_est;
        const double d = v_sp - v_est;
        sum_diff2 += d * d;
        sum_bound += v_bound;
        sum_bound2 += v_bound * v_bound;
    }

    SensitivityReport rep;
    rep.mc_n = mc_n;
    const double dn = static_cast<double>(mc_n);
    rep.theta_sp = sum_sp / dn;
    rep.theta_estimated = sum_est / dn;
    rep.abs_gap = std::abs(rep.theta_sp - rep.theta_estimated);
    rep.bound = sum_bound / dn;
    const double mean_diff = rep.theta_sp - rep.theta_estimated;
    const double var_diff = std::max(0.0, sum_diff2 / dn - mean_diff * mean_diff);
    const double var_bound =
        std::max(0.0, sum_bound2 / dn - rep.bound * rep.bound);
    rep.gap_mc_se = std::sqrt(var_diff / dn);
    rep.bound_mc_se = std::sqrt(var_bound / dn);
    rep.mc_se = std::sqrt(rep.gap_mc_se * rep.gap_mc_se +
                          rep.bound_mc_se * rep.bound_mc_se);
    return rep;
}

namespace {

struct RmseAcc {
    double sum_sq = 0.0;
    double sum_q4 = 0.0;
    int n = 0;
    void add(double err) {
        const double e2 = err * err;
        sum_sq += e2;
        sum_q4 += e2 * e2;
        ++n;
    }
    double rmse() const { return std::sqrt(sum_sq / n); }
    // delta method: se(rmse) ~ sd(err^2) / (2 rmse sqrt(n))
    double se() const {
        const double m2 = sum_sq / n;
        const double var_e2 = std::max(0.0, sum_q4 / n - m2 * m2);
        const double r = rmse();
        return r > 0.0 ? std::sqrt(var_e2 / n) / (2.0 * r) : 0.0;
    }
};

// RMSE of both plug-in estimators over `reps` datasets at interval [a, b].
struct IntervalRmse {
    RmseAcc incr, ate;
};

IntervalRmse interval_rmse(const DgpSpec& base_spec, double a, double b,
                           int reps, std::uint64_t seed_base,
                           const SweepOptions& opts) {
    IntervalRmse acc;
    for (int rep = 0; rep < reps; ++rep) {
        DgpSpec spec = base_spec;
        spec.conf_a = a;
        spec.conf_b = b;
        spec.seed = splitmix64(seed_base + static_cast<std::uint64_t>(rep));
        auto [ds, oracle] = generate(spec);
        const ExpandedDesign ed = expand(ds, BasisSpec::cubic(static_cast<int>(ds.d())));
        const EstimateReport incr = incremental_plugin(ed, ds.y, opts.level);
        const EstimateReport ate =
            ate_plugin(ds, ed, ds.y, opts.t, opts.t_prime, opts.level);
        acc.incr.add(incr.point - true_theta_fs(oracle, ds));
        acc.ate.add(ate.point - true_tau_fs(oracle, ds, opts.t, opts.t_prime));
    }
    return acc;
}

}  // namespace

std::vector<SweepRow> confounding_sweep(const DgpSpec& base_spec,
                                        const std::vector<double>& r_grid,
                                        SweepMode mode, std::uint64_t seed,
                                        const SweepOptions& opts) {
    if (base_spec.scenario != Scenario::LocalConfounded)
        throw ConfigError("confounding_sweep requires the local-confounded scenario");
    for (double r : r_grid)
        if (r < 0.0 || r >= 1.0)
            throw ConfigError("InvalidParams: confounding ratio must be in [0,1)");
    if (opts.reps < 1) throw ConfigError("InvalidParams: reps must be >= 1");

    std::vector<SweepRow> rows;
    for (std::size_t ri = 0; ri < r_grid.size(); ++ri) {
        const double r = r_grid[ri];
        SweepRow row;
        row.r = r;
        row.mode = mode;

        double bound_a = 0.0, bound_b = 0.0;  // interval used for the bound
        if (r <= 0.0) {
            const IntervalRmse acc = interval_rmse(
                base_spec, 0.0, 0.0, opts.reps,
                seed + (static_cast<std::uint64_t>(ri) << 32), opts);
            row.rmse_incr = acc.incr.rmse();
            row.rmse_incr_se = acc.incr.se();
            row.rmse_ate = acc.ate.rmse();
            row.rmse_ate_se = acc.ate.se();
        } else if (mode == SweepMode::Random) {
            // fresh interval per replication, averaged RMSE at fixed ratio
            RmseAcc incr, ate;
            for (int rep = 0; rep < opts.reps; ++rep) {
                const CounterRng rng(seed,
                                     (static_cast<std::uint64_t>(ri) << 32) |
                                         static_cast<std::uint64_t>(rep));
                const double u = rng.uniform(0) * (1.0 - r);
                const double a = t4_quantile(std::max(u, 1e-12));
                const double b = t4_quantile(std::min(u + r, 1.0 - 1e-12));
                const IntervalRmse one = interval_rmse(
                    base_spec, a, b, 1,
                    seed + (static_cast<std::uint64_t>(ri) << 40) +
                        static_cast<std::uint64_t>(rep),
                    opts);
                incr.add(std::sqrt(one.incr.sum_sq));
                ate.add(std::sqrt(one.ate.sum_sq));
            }
            row.rmse_incr = incr.rmse();
            row.rmse_incr_se = incr.se();
            row.rmse_ate = ate.rmse();
            row.rmse_ate_se = ate.se();
            const double u_mid = (1.0 - r) / 2.0;
            bound_a = t4_quantile(u_mid);
            bound_b = t4_quantile(u_mid + r);
        } else {
            // worst interval over a fixed quantile grid, per estimator
            const int g_count = std::max(1, opts.worstcase_grid);
            double worst_incr = -1.0, worst_ate = -1.0;
            RmseAcc at_worst_incr, at_worst_ate;
            for (int g = 0; g < g_count; ++g) {
                const double u = (g_count == 1)
                                     ? (1.0 - r) / 2.0
                                     : (1.0 - r) * g / (g_count - 1);
                const double a = t4_quantile(std::max(u, 1e-12));
                const double b = t4_quantile(std::min(u + r, 1.0 - 1e-12));
                const IntervalRmse acc = interval_rmse(
                    base_spec, a, b, opts.reps,
                    seed + (static_cast<std::uint64_t>(ri) << 32), opts);
                if (acc.incr.rmse() > worst_incr) {
                    worst_incr = acc.incr.rmse();
                    at_worst_incr = acc.incr;
                    bound_a = a;
                    bound_b = b;
                }
                if (acc.ate.rmse() > worst_ate) {
                    worst_ate = acc.ate.rmse();
                    at_worst_ate = acc.ate;
                }
            }
            row.rmse_incr = at_worst_incr.rmse();
            row.rmse_incr_se = at_worst_incr.se();
            row.rmse_ate = at_worst_ate.rmse();
            row.rmse_ate_se = at_worst_ate.se();
        }

        if (r > 0.0 && opts.bound_mc_n >= 2) {
            DgpSpec bspec = base_spec;
            bspec.conf_a = bound_a;
            bspec.conf_b = bound_b;
            bspec.seed = seed;
            auto [ds, oracle] = generate(bspec);
            (void)ds;
            const SensitivityReport sr =
                sensitivity_bound(oracle, opts.bound_mc_n, seed + ri);
            row.bound = sr.bound;
            row.bound_mc_se = sr.bound_mc_se;
        }
        rows.push_back(row);
    }
    return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows,
                     const DgpSpec& base_spec, std::uint64_t seed,
                     const SweepOptions& opts) {
    out << "# version=increff-1.0\n"
        << "# scenario=" << scenario_name(base_spec.scenario) << '\n'
        << "# n=" << base_spec.n << '\n'
        << "# seed=" << seed << '\n'
        << "# reps=" << opts.reps << '\n'
        << "# interval_convention=t4-quantile\n"
        << "r,mode,rmse_incr,rmse_ate,bound,mc_se\n";
    for (const auto& row : rows)
        out << row.r << ','
            << (row.mode == SweepMode::Random ? "random" : "worstcase") << ','
            << row.rmse_incr << ',' << row.rmse_ate << ',' << row.bound << ','
            << row.bound_mc_se << '\n';
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows,
                     const DgpSpec& base_spec, std::uint64_t seed,
                     const SweepOptions& opts) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open file for writing: " + path);
    write_sweep_csv(out, rows, base_spec, seed, opts);
}

}  // namespace increff
