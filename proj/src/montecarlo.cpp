#include "increff/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "increff/errors.hpp"
#include "increff/orthodespar.hpp"
#include "increff/plugin.hpp"

namespace increff {

int worker_count() {
    if (const char* env = std::getenv("INCREFF_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t rep_seed(std::uint64_t seed, int n, int rep) {
    return splitmix64(splitmix64(seed + 0x516CC5ULL * static_cast<std::uint64_t>(n)) +
                      static_cast<std::uint64_t>(rep));
}

struct RepResult {
    double err = 0.0;
    double length = 0.0;
    double covered = 0.0;
    double z = 0.0;
};

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double se_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    const double nn = static_cast<double>(v.size());
    return std::sqrt(s / (nn - 1.0) / nn);
}

CellStats aggregate(int n, const std::string& estimand, const std::string& method,
                    const std::vector<RepResult>& reps, bool keep_z) {
    CellStats c;
    c.n = n;
    c.estimand = estimand;
    c.method = method;
    c.reps = static_cast<int>(reps.size());
    std::vector<double> cover, len, err2;
    cover.reserve(reps.size());
    len.reserve(reps.size());
    err2.reserve(reps.size());
    std::vector<double> errs;
    errs.reserve(reps.size());
    for (const auto& r : reps) {
        cover.push_back(r.covered);
        len.push_back(r.length);
        err2.push_back(r.err * r.err);
        errs.push_back(r.err);
        if (keep_z) c.rep_z.push_back(r.z);
    }
    c.coverage = mean_of(cover);
    c.coverage_se = se_of(cover);
    c.ci_length = mean_of(len);
    c.ci_length_se = se_of(len);
    c.bias = mean_of(errs);
    c.bias_se = se_of(errs);
    c.mse = mean_of(err2);
    c.mse_se = se_of(err2);
    c.rmse = std::sqrt(c.mse);
    c.rmse_se = c.rmse > 0.0 ? c.mse_se / (2.0 * c.rmse) : 0.0;
    return c;
}

// Runs `body(rep)` over 0..reps-1, OpenMP-parallel unless `serial`. The
// serial path is the reference implementation used by determinism tests.
// First exception thrown by any replication is rethrown afterwards.
template <typename Body>
void replicate(int reps, bool serial, Body&& body) {
    if (serial) {
        for (int rep = 0; rep < reps; ++rep) body(rep);
        return;
    }
    std::exception_ptr first_error = nullptr;
#pragma omp parallel for num_threads(worker_count()) schedule(dynamic)
    for (int rep = 0; rep < reps; ++rep) {
        try {
            body(rep);
        } catch (...) {
#pragma omp critical
            if (!first_error) first_error = std::current_exception();
        }
    }
    if (first_error) std::rethrow_exception(first_error);
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Fresh ATE contrast levels drawn from the realized treatment values.
std::pair<double, double> contrast_pair(const Dataset& ds, std::uint64_t rs) {
    const auto n = static_cast<std::uint64_t>(ds.n());
    const CounterRng pick(rs, 0xA7E0ULL);
    const auto i = pick.below(n, 0);
    auto j = pick.below(n - 1, 1);
    if (j >= i) ++j;
    const double tv = ds.t[static_cast<Eigen::Index>(i)];
    double tp = ds.t[static_cast<Eigen::Index>(j)];
    if (tv == tp) tp += 1e-6;
    return {tv, tp};
}

int scenario_covariates(Scenario s) {
    switch (s) {
        case Scenario::GaussianCubic:
        case Scenario::HeavyTailCubic:
        case Scenario::LocalConfounded:
            return 1;
        case Scenario::Heteroscedastic:
        case Scenario::LocalIgnorability:
            return 0;
        default:
            throw ConfigError("run_table does not handle this scenario");
    }
}

}  // namespace

MonteCarloSummary run_table(const TableConfig& cfg) {
    if (cfg.reps < 1) throw ConfigError("InvalidParams: reps must be >= 1");
    if (!(cfg.level > 0.0 && cfg.level < 1.0))
        throw ConfigError("InvalidParams: level must be in (0,1)");
    if (cfg.run_ate && cfg.t == cfg.t_prime)
        throw ConfigError("InvalidParams: ATE contrast requires t != t_prime");

    // The replication scenarios have outcome equations without a constant
    // term; the reference results fit the cubic model without an intercept.
    BasisSpec basis = BasisSpec::cubic(scenario_covariates(cfg.scenario));
    basis.terms.erase(basis.terms.begin());
    basis.include_intercept = false;
    MonteCarloSummary summary;
    for (int n : cfg.n_values) {
        std::vector<RepResult> incr(cfg.reps), ate(cfg.reps);
        replicate(cfg.reps, cfg.serial, [&](int rep) {
            DgpSpec spec;
            spec.scenario = cfg.scenario;
            spec.n = n;
            spec.seed = rep_seed(cfg.seed, n, rep);
            auto [ds, oracle] = generate(spec);
            const ExpandedDesign ed = expand(ds, basis);
            if (cfg.run_incremental) {
                const double truth = true_theta_fs(oracle, ds);
                const EstimateReport r = incremental_plugin(ed, ds.y, cfg.level);
                incr[rep] = {r.point - truth, r.ci_upper - r.ci_lower,
                             (truth >= r.ci_lower && truth <= r.ci_upper) ? 1.0 : 0.0,
                             (r.point - truth) / r.std_error};
            }
            if (cfg.run_ate) {
                const double truth = true_tau_fs(oracle, ds, cfg.t, cfg.t_prime);
                const EstimateReport r =
                    ate_plugin(ds, ed, ds.y, cfg.t, cfg.t_prime, cfg.level);
                ate[rep] = {r.point - truth, r.ci_upper - r.ci_lower,
                            (truth >= r.ci_lower && truth <= r.ci_upper) ? 1.0 : 0.0,
                            (r.point - truth) / r.std_error};
            }
        });
        if (cfg.run_incremental)
            summary.cells.push_back(aggregate(n, "incremental", "ols-plugin", incr, false));
        if (cfg.run_ate)
            summary.cells.push_back(aggregate(n, "ate", "ols-plugin", ate, false));
    }

    summary.config_echo = {
        {"command", "simulate"},
        {"scenario", scenario_name(cfg.scenario)},
        {"method", "ols-plugin"},
        {"reps", std::to_string(cfg.reps)},
        {"seed", std::to_string(cfg.seed)},
        {"t", std::to_string(cfg.t)},
        {"tprime", std::to_string(cfg.t_prime)},
        {"level", std::to_string(cfg.level)},
        {"basis", basis.to_string()},
    };
    std::string ns;
    for (std::size_t i = 0; i < cfg.n_values.size(); ++i)
        ns += (i ? "," : "") + std::to_string(cfg.n_values[i]);
    summary.config_echo.emplace_back("n", ns);
    return summary;
}

MonteCarloSummary run_despar_table(const DesparTableConfig& cfg) {
    if (cfg.reps < 1) throw ConfigError("InvalidParams: reps must be >= 1");
    const int n_main = cfg.p - cfg.n_inter - 1;
    if (n_main < cfg.n_inter || cfg.n_inter < 0)
        throw ConfigError("InvalidParams: bad sparse dimensions");

    MonteCarloSummary summary;
    for (int n : cfg.n_values) {
        // pilot draws (separate rep indices) cross-validate the penalties
        // once per cell; replications then run at the fixed selection
        double lam_incr = -1.0, lamx_incr = -1.0, lam_ate = -1.0, lamx_ate = -1.0;
        if (cfg.pilot_reps > 0) {
            std::vector<double> li, lxi, la, lxa;
            for (int pr = 0; pr < cfg.pilot_reps; ++pr) {
                const std::uint64_t rs =
                    rep_seed(cfg.seed, n, (1 << 28) + pr);
                const SparseHighDimData data = sparse_highdim_generate(
                    n, cfg.p, cfg.s, cfg.rate, rs, cfg.t3_noise, cfg.n_inter);
                const ExpandedDesign ed =
                    expand(data.ds, sparse_highdim_basis(n_main, cfg.n_inter));
                if (cfg.run_incremental) {
                    const DesparResult r =
                        despar_with_cv(orthogonalize(ed), data.ds.y, cfg.k_folds,
                                       cfg.grid_size, rs, cfg.level);
                    li.push_back(r.beta_hat.lambda);
                    lxi.push_back(r.gamma_hat.lambda);
                }
                if (cfg.run_ate) {
                    const auto [tv, tp] = contrast_pair(data.ds, rs);
                    const DesparResult r = despar_with_cv(
                        contrast_transform(data.ds, ed, tv, tp), data.ds.y,
                        cfg.k_folds, cfg.grid_size, rs + 1, cfg.level);
                    la.push_back(r.beta_hat.lambda);
                    lxa.push_back(r.gamma_hat.lambda);
                }
            }
            if (cfg.run_incremental) {
                lam_incr = median_of(li);
                lamx_incr = median_of(lxi);
            }
            if (cfg.run_ate) {
                lam_ate = median_of(la);
                lamx_ate = median_of(lxa);
            }
        }

        std::vector<RepResult> incr(cfg.reps), ate(cfg.reps);
        replicate(cfg.reps, cfg.serial, [&](int rep) {
            const std::uint64_t rs = rep_seed(cfg.seed, n, rep);
            const SparseHighDimData data = sparse_highdim_generate(
                n, cfg.p, cfg.s, cfg.rate, rs, cfg.t3_noise, cfg.n_inter);
            const ExpandedDesign ed =
                expand(data.ds, sparse_highdim_basis(n_main, cfg.n_inter));
            if (cfg.run_incremental) {
                const double truth = true_theta_fs(data.oracle, data.ds);
                const TransformedDesign td = orthogonalize(ed);
                const DesparResult r =
                    cfg.pilot_reps > 0
                        ? despar_estimate(td, data.ds.y, lam_incr, lamx_incr,
                                          cfg.level)
                        : despar_with_cv(td, data.ds.y, cfg.k_folds,
                                         cfg.grid_size, rs, cfg.level);
                incr[rep] = {r.ci.point - truth, r.ci.ci_upper - r.ci.ci_lower,
                             (truth >= r.ci.ci_lower && truth <= r.ci.ci_upper)
                                 ? 1.0 : 0.0,
                             (r.ci.point - truth) / r.ci.std_error};
            }
            if (cfg.run_ate) {
                const auto [tv, tp] = contrast_pair(data.ds, rs);
                const double truth = true_tau_fs(data.oracle, data.ds, tv, tp);
                const TransformedDesign td = contrast_transform(data.ds, ed, tv, tp);
                const DesparResult r =
                    cfg.pilot_reps > 0
                        ? despar_estimate(td, data.ds.y, lam_ate, lamx_ate,
                                          cfg.level)
                        : despar_with_cv(td, data.ds.y, cfg.k_folds,
                                         cfg.grid_size, rs + 1, cfg.level);
                ate[rep] = {r.ci.point - truth, r.ci.ci_upper - r.ci.ci_lower,
                            (truth >= r.ci.ci_lower && truth <= r.ci.ci_upper)
                                ? 1.0 : 0.0,
                            (r.ci.point - truth) / r.ci.std_error};
            }
        });
        if (cfg.run_incremental)
            summary.cells.push_back(
                aggregate(n, "incremental", "despar", incr, cfg.keep_rep_z));
        if (cfg.run_ate)
            summary.cells.push_back(aggregate(n, "ate", "despar", ate, cfg.keep_rep_z));
    }

    summary.config_echo = {
        {"command", "simulate"},
        {"scenario", "sparse-highdim"},
        {"method", "despar"},
        {"reps", std::to_string(cfg.reps)},
        {"seed", std::to_string(cfg.seed)},
        {"p", std::to_string(cfg.p)},
        {"s", std::to_string(cfg.s)},
        {"rate", std::to_string(cfg.rate)},
        {"t3_noise", cfg.t3_noise ? "true" : "false"},
        {"kfolds", std::to_string(cfg.k_folds)},
        {"grid", std::to_string(cfg.grid_size)},
        {"level", std::to_string(cfg.level)},
    };
    std::string ns;
    for (std::size_t i = 0; i < cfg.n_values.size(); ++i)
        ns += (i ? "," : "") + std::to_string(cfg.n_values[i]);
    summary.config_echo.emplace_back("n", ns);
    return summary;
}

void write_summary_csv(std::ostream& out, const MonteCarloSummary& summary) {
    out << "# version=increff-1.0\n";
    for (const auto& [k, v] : summary.config_echo)
        out << "# " << k << '=' << v << '\n';
    out << "n,estimand,method,reps,coverage,coverage_se,ci_length,ci_length_se,"
           "rmse,rmse_se,bias,bias_se\n";
    for (const auto& c : summary.cells)
        out << c.n << ',' << c.estimand << ',' << c.method << ',' << c.reps << ','
            << c.coverage << ',' << c.coverage_se << ',' << c.ci_length << ','
            << c.ci_length_se << ',' << c.rmse << ',' << c.rmse_se << ','
            << c.bias << ',' << c.bias_se << '\n';
}

void write_summary_markdown(std::ostream& out, const MonteCarloSummary& summary) {
    out << "<!-- version=increff-1.0";
    for (const auto& [k, v] : summary.config_echo) out << ' ' << k << '=' << v;
    out << " -->\n";
    out << "| n | estimand | method | coverage | CI length | RMSE |\n"
        << "|---|----------|--------|----------|-----------|------|\n";
    out.setf(std::ios::fixed);
    const auto old_prec = out.precision(3);
    for (const auto& c : summary.cells)
        out << "| " << c.n << " | " << c.estimand << " | " << c.method << " | "
            << c.coverage << " \xC2\xB1 " << c.coverage_se << " | " << c.ci_length
            << " \xC2\xB1 " << c.ci_length_se << " | " << c.rmse << " \xC2\xB1 "
            << c.rmse_se << " |\n";
    out.precision(old_prec);
    out.unsetf(std::ios::fixed);
}

}  // namespace increff
