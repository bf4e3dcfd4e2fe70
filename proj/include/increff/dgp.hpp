#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "increff/basis.hpp"
#include "increff/dataset.hpp"
#include "increff/rng.hpp"

namespace increff {

enum class Scenario {
    GaussianCubic,       // t = h + e_t, x = h + e_x, Gaussian; y = 3t + t^2 + x + e_y
    HeavyTailCubic,      // same with t4-distributed h, e_x, e_t
    SparseHighDim,       // sparse linear treatment + interaction outcome
    LocalConfounded,     // HeavyTailCubic plus piecewise-linear f_conf(h) in y
    Heteroscedastic,     // t ~ U(-.5,1.5), y = t^2 + |t| e
    LocalIgnorability    // T = sign(H)|e|, Y = 2t + (t-1)1{t>=1} H
};

std::string scenario_name(Scenario s);
Scenario scenario_from_name(const std::string& name);

struct DgpSpec {
    Scenario scenario = Scenario::GaussianCubic;
    int n = 100;
    std::uint64_t seed = 0;

    // LocalConfounded interval; requires a <= b.
    double conf_a = 0.0;
    double conf_b = 0.0;

    // SparseHighDim parameters. p = main + interactions + 1 quadratic term.
    int hd_p = 703;
    int hd_n_inter = 36;
    int hd_s = 26;
    double hd_rate = 3.1622776601683795;  // sqrt(10), rate parameterization
    bool hd_t3_noise = false;

    int hd_n_main() const { return hd_p - hd_n_inter - 1; }
};

// One observation of a scenario's law; pure function of (spec, row index).
struct DrawnRow {
    double y = 0.0;
    double t = 0.0;
    Eigen::RowVectorXd x;
    double h = 0.0;
    bool has_h = false;
};

// Ground-truth functions attached to a generated dataset. Functions that a
// scenario does not provide throw OracleError("OracleUnavailable").
struct OracleDgp {
    DgpSpec spec;
    bool has_h = false;

    std::function<double(double, const Eigen::RowVectorXd&, double)> m_fn;
    std::function<double(double, const Eigen::RowVectorXd&, double)> dm_dt_fn;
    std::function<double(double, const Eigen::RowVectorXd&)> m_obs_fn;
    // analytic d/dt of m_obs where a closed form exists; consumers fall
    // back to finite differences of m_obs when absent
    std::function<double(double, const Eigen::RowVectorXd&)> dm_obs_fn;
    std::function<double(double, const Eigen::RowVectorXd&)> score_obs_fn;
    std::function<double(double, const Eigen::RowVectorXd&, double)> score_full_fn;
    // Draws h ~ p(h | T=t, X=x); `slot` addresses the counter stream.
    std::function<double(double, const Eigen::RowVectorXd&, const CounterRng&,
                         std::uint32_t)> sample_h_fn;
    // Fresh i.i.d. draws from the scenario's joint law, addressed by row index.
    std::function<DrawnRow(std::uint64_t)> row_sampler;

    double m(double t, const Eigen::RowVectorXd& x, double h) const;
    double dm_dt(double t, const Eigen::RowVectorXd& x, double h) const;
    double m_obs(double t, const Eigen::RowVectorXd& x) const;
    double dm_obs(double t, const Eigen::RowVectorXd& x) const;
    double score_obs(double t, const Eigen::RowVectorXd& x) const;
    double score_full(double t, const Eigen::RowVectorXd& x, double h) const;
    double sample_h(double t, const Eigen::RowVectorXd& x, const CounterRng& rng,
                    std::uint32_t slot) const;
    bool has_score_obs() const { return static_cast<bool>(score_obs_fn); }
    bool has_score_full() const { return static_cast<bool>(score_full_fn); }
    bool has_m_obs() const { return static_cast<bool>(m_obs_fn); }
    bool has_dm_obs() const { return static_cast<bool>(dm_obs_fn); }
    bool has_h_sampler() const { return static_cast<bool>(sample_h_fn); }
};

// Evaluates the scenario's generating equations for one row index.
DrawnRow sample_row(const DgpSpec& spec, std::uint64_t row);

// Draws the full dataset (rows in parallel, schedule-independent) with its
// oracle attached. Throws ConfigError("InvalidParams") for bad parameters.
std::pair<Dataset, OracleDgp> generate(const DgpSpec& spec);

// The sparse high-dimensional scenario with its true coefficient vectors.
// Coefficients beta (length p) cover main effects, interactions with the
// first hd_n_inter covariates, and the quadratic treatment term (index p-1,
// always in the support). gamma (length n_main) drives treatment assignment.
struct SparseHighDimData {
    Dataset ds;
    OracleDgp oracle;
    Eigen::VectorXd true_beta;
    Eigen::VectorXd true_gamma;
};
SparseHighDimData sparse_highdim_generate(int n, int p, int s, double rate,
                                          std::uint64_t seed,
                                          bool t3_noise = false,
                                          int n_inter = 36);

// Estimation basis for the sparse scenario:
// 1 + t + x1..x_main + t*x1..t*x_ninter + t^2.
BasisSpec sparse_highdim_basis(int n_main, int n_inter);

// Oracle Monte Carlo scoring targets (conditional estimands).
double true_theta_fs(const OracleDgp& oracle, const Dataset& ds);
double true_tau_fs(const OracleDgp& oracle, const Dataset& ds, double t,
                   double t_prime);

// Identification check: compares E[Y'(t)|T=t,X=x] (Monte Carlo over the
// conditional H law) with the derivative of E[Y|T=t,X=x] (central finite
// differences of the observational surface) on a grid of treatment values.
struct Prop1Point {
    double t = 0.0;
    double lhs = 0.0;     // MC mean of Y'(t) given (T=t, X=x)
    double lhs_mc_se = 0.0;
    double rhs = 0.0;     // finite-difference derivative of m_obs
    double gap = 0.0;
};
struct Prop1Result {
    std::vector<Prop1Point> points;
    double max_abs_gap = 0.0;
};
Prop1Result prop1_check(const OracleDgp& oracle, const std::vector<double>& t_grid,
                        const Eigen::RowVectorXd& x_point, int mc_n,
                        std::uint64_t seed);

// Piecewise-linear confounder contribution of the locally confounded DGP.
double f_conf(double h, double a, double b);

// Writes the dataset plus a sidecar "<path>.meta" file (flat key=value)
// describing scenario, seed and parameters.
void persist_with_metadata(const std::string& path, const Dataset& ds,
                           const DgpSpec& spec);

}  // namespace increff
