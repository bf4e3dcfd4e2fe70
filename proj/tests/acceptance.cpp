// Acceptance suite: one pass/fail line per criterion. Accepts an optional
// list of criterion numbers to run (default: all ten). Exits nonzero when
// any selected criterion fails.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <chrono>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "increff/basis.hpp"
#include "increff/dgp.hpp"
#include "increff/montecarlo.hpp"
#include "increff/orthodespar.hpp"
#include "increff/plugin.hpp"
#include "increff/regress.hpp"
#include "increff/rng.hpp"
#include "increff/sensitivity.hpp"

using namespace increff;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& what,
            const std::string& detail) {
    if (!pass) ++g_failures;
    std::printf("%s: criterion %d - %s%s%s\n", pass ? "PASS" : "FAIL",
                criterion, what.c_str(), detail.empty() ? "" : " | ",
                detail.c_str());
    std::fflush(stdout);
}

const CellStats& find_cell(const MonteCarloSummary& s, int n,
                           const std::string& estimand) {
    for (const auto& c : s.cells)
        if (c.n == n && c.estimand == estimand) return c;
    std::fprintf(stderr, "missing cell n=%d estimand=%s\n", n,
                 estimand.c_str());
    std::exit(1);
}

struct RefCell {
    int n;
    double cov_incr, cov_ate;
    double len_incr, len_ate;
    double rmse_incr, rmse_ate;
};

// Reference replication table for one low-dimensional scenario: coverage
// within +-0.02, mean CI length and RMSE within +-20%.
bool check_reference_table(const MonteCarloSummary& s,
                           const std::vector<RefCell>& ref,
                           std::string& detail) {
    bool ok = true;
    std::ostringstream os;
    os.precision(3);
    for (const auto& r : ref) {
        const auto& ci = find_cell(s, r.n, "incremental");
        const auto& ca = find_cell(s, r.n, "ate");
        const auto chk = [&](const char* tag, double got, double want,
                             bool relative) {
            const bool pass = relative
                                  ? std::abs(got - want) <= 0.20 * want
                                  : std::abs(got - want) <= 0.02 + 1e-12;
            if (!pass) {
                ok = false;
                os << " n=" << r.n << " " << tag << " got " << got
                   << " want " << want << ";";
            }
        };
        chk("cov(incr)", ci.coverage, r.cov_incr, false);
        chk("cov(ate)", ca.coverage, r.cov_ate, false);
        chk("len(incr)", ci.ci_length, r.len_incr, true);
        chk("len(ate)", ca.ci_length, r.len_ate, true);
        chk("rmse(incr)", ci.rmse, r.rmse_incr, true);
        chk("rmse(ate)", ca.rmse, r.rmse_ate, true);
    }
    if (ok) {
        for (const auto& r : ref) {
            const auto& ci = find_cell(s, r.n, "incremental");
            const auto& ca = find_cell(s, r.n, "ate");
            os << " n=" << r.n << ": cov " << ci.coverage << "/" << ca.coverage
               << " len " << ci.ci_length << "/" << ca.ci_length << " rmse "
               << ci.rmse << "/" << ca.rmse << ";";
        }
    }
    detail = os.str();
    return ok;
}

void criterion1() {
    TableConfig cfg;
    cfg.scenario = Scenario::GaussianCubic;
    cfg.n_values = {10, 20, 50};
    cfg.reps = 1000;
    cfg.seed = 9;
    const MonteCarloSummary s = run_table(cfg);
    const std::vector<RefCell> ref{
        {10, 0.96, 0.95, 0.87, 1.09, 0.20, 0.25},
        {20, 0.96, 0.94, 0.31, 0.45, 0.08, 0.11},
        {50, 0.94, 0.93, 0.15, 0.23, 0.04, 0.06},
    };
    std::string detail;
    const bool ok = check_reference_table(s, ref, detail);
    report(1, ok, "gaussian cubic plug-in table matches reference cells",
           detail);
}

void criterion2() {
    TableConfig cfg;
    cfg.scenario = Scenario::HeavyTailCubic;
    cfg.n_values = {10, 20, 50};
    cfg.reps = 1000;
    cfg.seed = 2;
    const MonteCarloSummary s = run_table(cfg);
    const std::vector<RefCell> ref{
        {10, 0.96, 0.95, 0.66, 0.87, 0.14, 0.18},
        {20, 0.96, 0.97, 0.24, 0.34, 0.06, 0.08},
        {50, 0.96, 0.95, 0.11, 0.16, 0.03, 0.04},
    };
    std::string detail;
    const bool ok = check_reference_table(s, ref, detail);
    report(2, ok, "heavy-tail plug-in table matches reference cells", detail);
}

void criterion3() {
    TableConfig cfg;
    cfg.scenario = Scenario::GaussianCubic;
    cfg.n_values = {50, 200};
    cfg.reps = 2000;
    cfg.seed = 13;
    cfg.t = 0.5;
    cfg.t_prime = -0.5;  // unit-length contrast
    const MonteCarloSummary s = run_table(cfg);
    bool ok = true;
    std::ostringstream os;
    os.precision(4);
    for (int n : cfg.n_values) {
        const auto& ci = find_cell(s, n, "incremental");
        const auto& ca = find_cell(s, n, "ate");
        const double slack =
            2.0 * std::sqrt(ci.mse_se * ci.mse_se + ca.mse_se * ca.mse_se);
        if (!(ci.mse <= ca.mse + slack)) ok = false;
        os << " n=" << n << ": mse incr " << ci.mse << " vs ate " << ca.mse
           << " (slack " << slack << ");";
    }
    report(3, ok,
           "incremental MSE <= unit-contrast MSE on the gaussian scenario",
           os.str());
}

void despar_variant(bool t3, bool check_window, std::uint64_t seed, bool& ok,
                    std::ostringstream& os) {
    DesparTableConfig cfg;
    cfg.reps = 300;
    cfg.seed = seed;
    cfg.t3_noise = t3;
    const MonteCarloSummary s = run_despar_table(cfg);
    const std::vector<std::pair<int, double>> window{
        {200, 0.72}, {400, 0.42}, {600, 0.22}, {1000, 0.11}};
    double prev = 1e300;
    os << (t3 ? " [t3]" : " [t4]");
    for (const auto& [n, ref] : window) {
        const auto& ci = find_cell(s, n, "incremental");
        const auto& ca = find_cell(s, n, "ate");
        if (!(ci.rmse < ca.rmse)) {
            ok = false;
            os << " n=" << n << " dominance fails (" << ci.rmse
               << " >= " << ca.rmse << ");";
        }
        if (!(ci.rmse < prev)) {
            ok = false;
            os << " n=" << n << " not monotone;";
        }
        prev = ci.rmse;
        if (check_window && !(ci.rmse >= 0.5 * ref && ci.rmse <= 2.0 * ref)) {
            ok = false;
            os << " n=" << n << " rmse " << ci.rmse << " outside [" << 0.5 * ref
               << "," << 2.0 * ref << "];";
        }
        os << " n=" << n << ": " << ci.rmse << "/" << ca.rmse << ";";
    }
}

void criterion4() {
    bool ok = true;
    std::ostringstream os;
    os.precision(3);
    despar_variant(false, true, 14, ok, os);
    despar_variant(true, false, 15, ok, os);
    report(4, ok,
           "high-dimensional debiased pipeline: incremental RMSE dominates "
           "the contrast analogue, decreases in n and stays near reference "
           "scale",
           os.str());
}

void criterion5() {
    TableConfig cfg;
    cfg.scenario = Scenario::Heteroscedastic;
    cfg.n_values = {50};
    cfg.reps = 2000;
    cfg.seed = 16;
    cfg.t = 0.5;
    cfg.t_prime = -0.5;
    const MonteCarloSummary s = run_table(cfg);
    const auto& ci = find_cell(s, 50, "incremental");
    const auto& ca = find_cell(s, 50, "ate");
    const double slack =
        2.0 * std::sqrt(ci.rmse_se * ci.rmse_se + ca.rmse_se * ca.rmse_se);
    const bool ok = ca.rmse <= ci.rmse + slack;
    std::ostringstream os;
    os.precision(4);
    os << "rmse ate " << ca.rmse << " vs incr " << ci.rmse << " (slack "
       << slack << ")";
    report(5, ok,
           "heteroscedastic scenario reverses the ordering: contrast beats "
           "incremental at n=50",
           os.str());
}

// Normal CDF for the one-sample Kolmogorov-Smirnov statistic.
double phi(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// The debiased CI targets the superpopulation average derivative, so
// calibration is scored against it. For the sparse scenario it is analytic
// in the true coefficients: theta = c1 * sum(beta_inter) + 2 * beta_quad *
// E[T], with c1 the common mean of the factor columns (product columns have
// mean c1^2 by independence) and E[T] the induced treatment mean.
void criterion6() {
    const int n = 2000, p = 33, n_inter = 7, s_supp = 5, reps = 1000;
    const int n_main = p - n_inter - 1;
    const double rate = 3.1622776601683795;

    // factor-column mean by quadrature-grade MC of the winsorized t4 law
    const CounterRng crng(1701, 0);
    double c1 = 0.0;
    const int c_draws = 2'000'000;
#pragma omp parallel for reduction(+ : c1) schedule(static)
    for (int i = 0; i < c_draws; ++i)
        c1 += 2.8 * std::sqrt(std::min(
                  10.0, std::abs(crng.student_t(
                            4, static_cast<std::uint32_t>(i)))));
    c1 /= c_draws;

    // penalties cross-validated on pilot draws, then held fixed
    double lam = 0.0, lam_x = 0.0;
    {
        std::vector<double> ls, lxs;
        for (int pr = 0; pr < 3; ++pr) {
            const SparseHighDimData d = sparse_highdim_generate(
                n, p, s_supp, rate, 9'000'000ULL + pr, false, n_inter);
            const ExpandedDesign ed =
                expand(d.ds, sparse_highdim_basis(n_main, n_inter));
            const DesparResult r = despar_with_cv(orthogonalize(ed), d.ds.y, 5,
                                                  20, 9'000'000ULL + pr);
            ls.push_back(r.cv_beta->lambda_min);
            lxs.push_back(r.cv_gamma->lambda_min);
        }
        std::sort(ls.begin(), ls.end());
        std::sort(lxs.begin(), lxs.end());
        lam = ls[1];
        lam_x = lxs[1];
    }

    int covered = 0;
    std::vector<double> z;
    z.reserve(reps);
    for (int rep = 0; rep < reps; ++rep) {
        const SparseHighDimData d = sparse_highdim_generate(
            n, p, s_supp, rate, 1'000'000ULL + rep, false, n_inter);
        const ExpandedDesign ed =
            expand(d.ds, sparse_highdim_basis(n_main, n_inter));
        const DesparResult res =
            despar_estimate(orthogonalize(ed), d.ds.y, lam, lam_x);
        double mean_t = 0.0;
        for (int k = 0; k < n_main; ++k)
            mean_t += d.true_gamma[k] * (k < n_inter ? c1 : c1 * c1);
        const double truth =
            c1 * d.true_beta.segment(n_main, n_inter).sum() +
            2.0 * d.true_beta[p - 1] * mean_t;
        z.push_back((res.ci.point - truth) / res.ci.std_error);
        if (res.ci.ci_lower <= truth && truth <= res.ci.ci_upper) ++covered;
    }
    const double coverage = static_cast<double>(covered) / reps;
    std::sort(z.begin(), z.end());
    const double m = static_cast<double>(z.size());
    double ks = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double f = phi(z[i]);
        ks = std::max(ks, std::max(f - static_cast<double>(i) / m,
                                   static_cast<double>(i + 1) / m - f));
    }
    // Asymptotic 1% critical value of the one-sample KS statistic.
    const double ks_crit = 1.6276 / std::sqrt(m);

    const bool cov_ok = coverage >= 0.92 && coverage <= 0.97;
    const bool ks_ok = ks < ks_crit;
    std::ostringstream os;
    os.precision(4);
    os << "coverage " << coverage << " (want [0.92,0.97]); KS " << ks
       << " vs 1% critical " << ks_crit;
    report(6, cov_ok && ks_ok,
           "debiased CI calibration on a well-specified sparse design",
           os.str());
}

// Outcome model outside the basis span, treatment score inside it:
// t = 0.5 x1 - 0.3 x2 + e with e ~ N(0,1), so -d/dt log p(t|x) is a linear
// combination of basis columns, while the outcome adds sin and quadratic
// terms the basis cannot represent. The debiased estimate of the average
// derivative must stay unbiased anyway.
void criterion7() {
    const int n = 4000, d = 6, reps = 200;
    const BasisSpec spec = BasisSpec::parse("1 + t + x1 + x2 + x3 + x4 + x5 + x6");
    std::vector<double> points;
    points.reserve(reps);
    for (int rep = 0; rep < reps; ++rep) {
        const CounterRng rng(18, static_cast<std::uint64_t>(rep));
        Dataset ds;
        ds.y.resize(n);
        ds.t.resize(n);
        ds.x.resize(n, d);
        ds.covariate_names = {"x1", "x2", "x3", "x4", "x5", "x6"};
        for (int i = 0; i < n; ++i) {
            const auto slot = [&](int k) {
                return static_cast<std::uint32_t>(i * 16 + k);
            };
            for (int j = 0; j < d; ++j) ds.x(i, j) = rng.normal(slot(j));
            const double e = rng.normal(slot(d));
            ds.t[i] = 0.5 * ds.x(i, 0) - 0.3 * ds.x(i, 1) + e;
            ds.y[i] = 2.0 * ds.t[i] + std::sin(2.0 * ds.x(i, 0)) +
                      0.5 * ds.x(i, 1) * ds.x(i, 1) + rng.normal(slot(d + 1));
        }
        const ExpandedDesign ed = expand(ds, spec);
        const TransformedDesign td = orthogonalize(ed);
        const DesparResult res =
            despar_with_cv(td, ds.y, 5, 20, 1000 + static_cast<std::uint64_t>(rep));
        points.push_back(res.ci.point);
    }
    double mean = 0.0;
    for (double v : points) mean += v;
    mean /= reps;
    double var = 0.0;
    for (double v : points) var += (v - mean) * (v - mean);
    var /= (reps - 1);
    const double mc_se = std::sqrt(var / reps);
    const double bias = mean - 2.0;
    const bool ok = std::abs(bias) <= 2.0 * mc_se;
    std::ostringstream os;
    os.precision(4);
    os << "mean bias " << bias << " vs 2 x MC SE " << 2.0 * mc_se << " (reps "
       << reps << ", n " << n << ")";
    report(7, ok,
           "debiased estimate stays unbiased with a misspecified outcome "
           "model when the treatment score lies in the basis",
           os.str());
}

void criterion8() {
    bool ok = true;
    std::ostringstream os;
    os.precision(3);
    const int mc_n = 50000;
    const auto run_one = [&](const DgpSpec& spec, bool require_exact_zero) {
        const auto [ds, oracle] = generate(spec);
        (void)ds;
        const SensitivityReport rep = sensitivity_bound(oracle, mc_n, 19);
        if (!rep.inequality_holds()) {
            ok = false;
            os << " " << scenario_name(spec.scenario) << " gap " << rep.abs_gap
               << " > bound " << rep.bound << " + 3se;";
        }
        if (require_exact_zero && (rep.abs_gap != 0.0 || rep.bound != 0.0)) {
            ok = false;
            os << " " << scenario_name(spec.scenario)
               << " not exactly 0/0 at r=0 (gap " << rep.abs_gap << ", bound "
               << rep.bound << ");";
        }
        os << " " << scenario_name(spec.scenario) << ": gap " << rep.abs_gap
           << " bound " << rep.bound << ";";
    };

    for (Scenario s : {Scenario::GaussianCubic, Scenario::HeavyTailCubic,
                       Scenario::Heteroscedastic, Scenario::LocalIgnorability}) {
        DgpSpec spec;
        spec.scenario = s;
        spec.n = 50;
        spec.seed = 19;
        run_one(spec, false);
    }
    {
        DgpSpec spec;
        spec.scenario = Scenario::SparseHighDim;
        spec.n = 50;
        spec.seed = 19;
        spec.hd_p = 33;
        spec.hd_n_inter = 7;
        spec.hd_s = 5;
        run_one(spec, false);
    }
    {
        // confounded interval covering half the treatment mass
        DgpSpec spec;
        spec.scenario = Scenario::LocalConfounded;
        spec.n = 50;
        spec.seed = 19;
        spec.conf_a = -0.74069718;
        spec.conf_b = 0.74069718;
        run_one(spec, false);
    }
    {
        // degenerate interval: no confounding, gap and bound exactly zero
        DgpSpec spec;
        spec.scenario = Scenario::LocalConfounded;
        spec.n = 50;
        spec.seed = 19;
        run_one(spec, true);
    }
    report(8, ok,
           "confounding-bound inequality holds on every scenario, exactly "
           "0/0 without confounding",
           os.str());
}

void criterion9() {
    bool ok = true;
    std::ostringstream os;
    os.precision(6);
    const std::vector<double> grid{0.5, 1.5};
    const int mc_n = 200000;
    // Finite-difference rounding in the observational derivative leaves a
    // deterministic remainder of order 1e-9 even with zero MC error.
    const double fd_allowance = 1e-8;

    const auto run_one = [&](Scenario s, bool check_exact_two) {
        DgpSpec spec;
        spec.scenario = s;
        spec.n = 50;
        spec.seed = 20;
        const auto [ds, oracle] = generate(spec);
        const Eigen::RowVectorXd x0 = ds.x.row(0);
        const Prop1Result res = prop1_check(oracle, grid, x0, mc_n, 20);
        for (const auto& pt : res.points) {
            if (!(pt.gap <= 3.0 * pt.lhs_mc_se + fd_allowance)) {
                ok = false;
                os << " " << scenario_name(s) << " t=" << pt.t << " gap "
                   << pt.gap << " > 3se " << 3.0 * pt.lhs_mc_se << ";";
            }
            if (check_exact_two && pt.t == 0.5 && pt.lhs != 2.0) {
                ok = false;
                os << " " << scenario_name(s) << " lhs at t=0.5 is " << pt.lhs
                   << ", expected exactly 2;";
            }
            os << " " << scenario_name(s) << " t=" << pt.t << ": lhs "
               << pt.lhs << " rhs " << pt.rhs << ";";
        }
    };
    run_one(Scenario::LocalIgnorability, true);
    run_one(Scenario::GaussianCubic, false);
    report(9, ok,
           "conditional-derivative identification check: both sides agree "
           "within MC error, exact value 2 at t=0.5",
           os.str());
}

bool property_basis_fd() {
    const BasisSpec spec = BasisSpec::cubic(2);
    const CounterRng rng(21, 0);
    for (int i = 0; i < 50; ++i) {
        const double t = 2.0 * rng.normal(static_cast<std::uint32_t>(3 * i));
        Eigen::RowVectorXd x(2);
        x << rng.normal(static_cast<std::uint32_t>(3 * i + 1)),
            rng.normal(static_cast<std::uint32_t>(3 * i + 2));
        const double eps = 1e-5 * std::max(1.0, std::abs(t));
        for (const auto& term : spec.terms) {
            const double fd =
                (term.eval(t + eps, x) - term.eval(t - eps, x)) / (2.0 * eps);
            if (std::abs(fd - term.deriv(t, x)) > 1e-6) return false;
        }
    }
    return true;
}

bool property_lasso() {
    const int n = 80, p = 6;
    const CounterRng rng(22, 0);
    Eigen::MatrixXd x(n, p);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j)
            x(i, j) = rng.normal(static_cast<std::uint32_t>(i * 8 + j));
        y[i] = 1.5 * x(i, 0) - 0.7 * x(i, 2) +
               0.3 * rng.normal(static_cast<std::uint32_t>(i * 8 + 7));
    }
    const double lambda = 0.1;
    const LassoFit fit = lasso_fit(x, y, lambda);
    // KKT on the solver's standardized scale
    const Eigen::VectorXd r = y - x * fit.beta;
    for (int k = 0; k < p; ++k) {
        const double sk = std::sqrt(x.col(k).squaredNorm() / n);
        const double g = x.col(k).dot(r) / (n * sk);
        if (std::abs(fit.beta[k]) > 1e-12) {
            const double sign = fit.beta[k] > 0 ? 1.0 : -1.0;
            if (std::abs(g - sign * lambda) > 1e-5) return false;
        } else if (std::abs(g) > lambda + 1e-5) {
            return false;
        }
    }
    // single-column closed form: soft threshold of the rescaled inner product
    const Eigen::MatrixXd col = x.col(0);
    const double s0 = std::sqrt(col.squaredNorm() / n);
    const LassoFit single = lasso_fit(col, y, lambda);
    const double z = x.col(0).dot(y) / (n * s0);
    const double shrunk =
        (std::abs(z) > lambda ? (z > 0 ? z - lambda : z + lambda) : 0.0) / s0;
    return std::abs(single.beta[0] - shrunk) < 1e-8;
}

bool property_ols() {
    const int n = 60, p = 4;
    const CounterRng rng(23, 0);
    Eigen::MatrixXd x(n, p);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = 1.0;
        for (int j = 1; j < p; ++j)
            x(i, j) = rng.normal(static_cast<std::uint32_t>(i * 8 + j));
        y[i] = x(i, 1) + rng.normal(static_cast<std::uint32_t>(i * 8 + 7));
    }
    const OlsFit fit = ols_fit(x, y);
    if ((x.transpose() * fit.residuals).cwiseAbs().maxCoeff() > 1e-8)
        return false;
    // invariance of fitted values under a column substitution X2 <- X2 + 2 X1
    Eigen::MatrixXd x2 = x;
    x2.col(2) += 2.0 * x2.col(1);
    const OlsFit fit2 = ols_fit(x2, y);
    return ((x * fit.beta) - (x2 * fit2.beta)).cwiseAbs().maxCoeff() < 1e-8;
}

bool property_orthogonalization() {
    DgpSpec spec;
    spec.scenario = Scenario::GaussianCubic;
    spec.n = 120;
    spec.seed = 24;
    const auto [ds, oracle] = generate(spec);
    (void)oracle;
    const ExpandedDesign ed = expand(ds, BasisSpec::cubic(1));
    const TransformedDesign td = orthogonalize(ed);
    // reconstruction: b_k = xt_k + t * alpha_k / alpha1
    for (int k = 0; k < td.p(); ++k) {
        if (k == td.treatment_col) continue;
        const Eigen::VectorXd rec =
            td.xt.col(k) + ds.t * (td.alpha[k] / td.alpha1);
        if ((rec - ed.design.col(k)).cwiseAbs().maxCoeff() > 1e-10)
            return false;
    }
    // the transform carries the functional onto the treatment coefficient
    const OlsFit raw = ols_fit(ed.design, ds.y);
    const OlsFit ort = ols_fit(td.xt, ds.y);
    const double functional = td.alpha.dot(raw.beta);
    return std::abs(functional - td.alpha1 * ort.beta[td.treatment_col]) < 1e-8;
}

bool property_variance_centering() {
    const SparseHighDimData data = sparse_highdim_generate(150, 33, 5, 1.0, 25,
                                                           false, 7);
    const BasisSpec spec = sparse_highdim_basis(25, 7);
    const ExpandedDesign ed = expand(data.ds, spec);
    const TransformedDesign td = orthogonalize(ed);
    const DesparResult res = despar_with_cv(td, data.ds.y, 5, 20, 25);
    const Eigen::Index n = td.n();
    const Eigen::VectorXd eps = data.ds.y - td.xt * res.beta_hat.beta;
    const Eigen::VectorXd deriv_term = (td.loadings / td.alpha1) * res.beta_hat.beta;
    const Eigen::VectorXd xi =
        eps.cwiseProduct(res.z_tilde) / res.zx1_inner + deriv_term;
    const Eigen::VectorXd xi_c =
        xi - Eigen::VectorXd::Constant(n, deriv_term.mean());
    const auto var_of = [n](const Eigen::VectorXd& v) {
        const double m = v.mean();
        return (v.array() - m).square().sum() / static_cast<double>(n);
    };
    const double u = var_of(xi), uc = var_of(xi_c);
    if (std::abs(u - res.u_hat2) > 1e-10 * std::max(1.0, std::abs(u)))
        return false;
    return std::abs(u - uc) <= 1e-10 * std::max(1.0, std::abs(u));
}

bool property_thread_independence() {
    TableConfig cfg;
    cfg.scenario = Scenario::GaussianCubic;
    cfg.n_values = {20};
    cfg.reps = 50;
    cfg.seed = 26;
    std::ostringstream a, b;
    cfg.serial = false;
    write_summary_csv(a, run_table(cfg));
    cfg.serial = true;
    write_summary_csv(b, run_table(cfg));
    return a.str() == b.str();
}

void criterion10() {
    bool ok = true;
    std::ostringstream os;
    const auto run = [&](const char* name, bool pass) {
        if (!pass) ok = false;
        os << " " << name << "=" << (pass ? "ok" : "FAIL") << ";";
    };
    run("basis-fd", property_basis_fd());
    run("lasso-kkt+soft-threshold", property_lasso());
    run("ols-orthogonality+reparam", property_ols());
    run("orthogonalization-identity", property_orthogonalization());
    run("variance-centering", property_variance_centering());
    run("serial-parallel-match", property_thread_independence());
    report(10, ok, "property suites pass deterministically under any worker "
                   "count",
           os.str());
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
    const auto want = [&](int k) { return wanted.empty() || wanted.count(k); };

    using Fn = void (*)();
    const std::vector<std::pair<int, Fn>> all{
        {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4},
        {5, criterion5}, {6, criterion6}, {7, criterion7}, {8, criterion8},
        {9, criterion9}, {10, criterion10}};
    for (const auto& [num, fn] : all) {
        if (!want(num)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        std::fprintf(stderr, "criterion %d took %.1f s\n", num,
                     std::chrono::duration<double>(t1 - t0).count());
    }
    return g_failures == 0 ? 0 : 1;
}
