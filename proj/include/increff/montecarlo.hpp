#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "increff/dgp.hpp"

namespace increff {

// Replication study for the OLS plug-in estimators on a low-dimensional
// scenario: coverage, CI length and RMSE per sample size and estimand.
struct TableConfig {
    Scenario scenario = Scenario::GaussianCubic;
    std::vector<int> n_values{10, 20, 50};
    int reps = 1000;
    std::uint64_t seed = 1;
    double t = 0.5;        // ATE contrast levels
    double t_prime = -0.5;
    double level = 0.95;
    bool run_incremental = true;
    bool run_ate = true;
    bool serial = false;  // run the serial reference path instead of OpenMP
};

struct CellStats {
    int n = 0;
    std::string estimand;  // "incremental" or "ate"
    std::string method;    // "ols-plugin" or "despar"
    int reps = 0;
    double coverage = 0.0, coverage_se = 0.0;
    double ci_length = 0.0, ci_length_se = 0.0;
    double rmse = 0.0, rmse_se = 0.0;
    double bias = 0.0, bias_se = 0.0;
    double mse = 0.0, mse_se = 0.0;
    // standardized errors (point - truth) / std_error, kept on request
    std::vector<double> rep_z;
};

struct MonteCarloSummary {
    std::vector<CellStats> cells;
    // config echo written into every output header; a table can be re-run
    // from its own header
    std::vector<std::pair<std::string, std::string>> config_echo;
};

// Per-replication seeds derive from (seed, n, rep), so results do not
// depend on the worker count or schedule.
MonteCarloSummary run_table(const TableConfig& cfg);

// Replication study for the desparsified pipeline on the sparse
// high-dimensional scenario. The ATE analogue draws a fresh contrast pair
// (t, t') per replication from the realized treatment values.
struct DesparTableConfig {
    std::vector<int> n_values{200, 400, 600, 1000};
    int reps = 300;
    std::uint64_t seed = 1;
    int p = 703;
    int n_inter = 36;
    int s = 26;
    double rate = 3.1622776601683795;
    bool t3_noise = false;
    int k_folds = 5;
    int grid_size = 20;
    // Penalties are cross-validated on this many pilot draws per (n,
    // estimand) cell and then held fixed across replications; 0 runs the
    // full CV inside every replication instead.
    int pilot_reps = 3;
    double level = 0.95;
    bool run_incremental = true;
    bool run_ate = true;
    bool keep_rep_z = false;
    bool serial = false;
};

MonteCarloSummary run_despar_table(const DesparTableConfig& cfg);

void write_summary_csv(std::ostream& out, const MonteCarloSummary& summary);
void write_summary_markdown(std::ostream& out, const MonteCarloSummary& summary);

// Worker cap honored by the OpenMP loops (INCREFF_THREADS, else all cores).
int worker_count();

}  // namespace increff
