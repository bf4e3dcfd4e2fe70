#include <CLI11.hpp>
#include <fstream>
#include <sstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "increff/dgp.hpp"
#include "increff/errors.hpp"
#include "increff/montecarlo.hpp"
#include "increff/orthodespar.hpp"
#include "increff/plugin.hpp"
#include "increff/sensitivity.hpp"

namespace {

using namespace increff;

const char* estimand_name(Estimand e) {
    switch (e) {
        case Estimand::Ate: return "ate";
        case Estimand::IncrementalSp: return "incremental-sp";
        default: return "incremental";
    }
}

void print_report(std::ostream& os, const EstimateReport& r) {
    os << std::setprecision(17);
    os << "estimand=" << estimand_name(r.estimand) << '\n'
       << "method=" << r.method << '\n'
       << "n=" << r.n << '\n'
       << "p=" << r.p << '\n'
       << "point=" << r.point << '\n'
       << "std_error=" << r.std_error << '\n'
       << "ci_lower=" << r.ci_lower << '\n'
       << "ci_upper=" << r.ci_upper << '\n'
       << "level=" << r.level << '\n';
    if (r.estimand == Estimand::Ate)
        os << "t=" << r.t << '\n' << "tprime=" << r.t_prime << '\n';
}

void write_report(const std::string& path, const std::string& format,
                  const EstimateReport& r) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot open file for writing: " + path);
    os << std::setprecision(17);
    if (format == "markdown") {
        os << "| estimand | method | n | point | std_error | ci_lower | ci_upper |\n"
           << "|----------|--------|---|-------|-----------|----------|----------|\n"
           << "| " << estimand_name(r.estimand) << " | " << r.method << " | "
           << r.n << " | " << r.point << " | " << r.std_error << " | "
           << r.ci_lower << " | " << r.ci_upper << " |\n";
    } else {
        os << "estimand,method,n,p,point,std_error,ci_lower,ci_upper,level,t,tprime\n"
           << estimand_name(r.estimand) << ',' << r.method << ',' << r.n << ','
           << r.p << ',' << r.point << ',' << r.std_error << ',' << r.ci_lower
           << ',' << r.ci_upper << ',' << r.level << ',' << r.t << ','
           << r.t_prime << '\n';
    }
}

struct CommonOpts {
    std::string scenario = "gaussian-cubic";
    std::vector<int> n_values;
    int reps = 1000;
    std::uint64_t seed = 1;
    std::string basis;
    std::string method = "ols-plugin";
    std::string estimand = "incremental";
    double t = 0.5, t_prime = -0.5;
    bool has_t = false, has_tprime = false;
    double level = 0.95;
    int k_folds = 10;
    int grid_size = 100;
    std::string out_path;
    std::string format = "csv";
};

void emit_summary(const MonteCarloSummary& summary, const CommonOpts& o) {
    const auto write = [&](std::ostream& os) {
        if (o.format == "markdown")
            write_summary_markdown(os, summary);
        else
            write_summary_csv(os, summary);
    };
    if (o.out_path.empty()) {
        write(std::cout);
    } else {
        std::ofstream os(o.out_path);
        if (!os) throw DataError("cannot open file for writing: " + o.out_path);
        write(os);
    }
}

// Default schema: outcome "y", treatment "t", every other column except
// the simulation-only "h" is a covariate, in file order.
ColumnSchema schema_from_header(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    std::string header;
    if (!std::getline(in, header)) throw DataError("EmptyFile: " + path);
    if (!header.empty() && header.back() == '\r') header.pop_back();
    ColumnSchema schema;
    std::string cell;
    std::istringstream hs(header);
    while (std::getline(hs, cell, ','))
        if (cell != "y" && cell != "t" && cell != "h")
            schema.covariate_names.push_back(cell);
    return schema;
}

int run_estimate(const CommonOpts& o, const std::string& data_path) {
    if (o.basis.empty()) throw ConfigError("estimate requires --basis");
    if (o.method != "ols-plugin" && o.method != "despar")
        throw ConfigError("unknown method: " + o.method);
    if (o.estimand != "incremental" && o.estimand != "ate")
        throw ConfigError("unknown estimand: " + o.estimand);
    const bool ate = o.estimand == "ate";
    if (ate && (!o.has_t || !o.has_tprime))
        throw ConfigError("estimand=ate requires --t and --tprime");
    if (ate && o.t == o.t_prime)
        throw ConfigError("estimand=ate requires t != tprime");

    const Dataset ds = load_csv(data_path, schema_from_header(data_path));
    const BasisSpec spec = BasisSpec::parse(o.basis);
    const ExpandedDesign ed = expand(ds, spec);

    EstimateReport report;
    if (o.method == "ols-plugin") {
        report = ate ? ate_plugin(ds, ed, ds.y, o.t, o.t_prime, o.level)
                     : incremental_plugin(ed, ds.y, o.level);
    } else {
        const TransformedDesign td =
            ate ? contrast_transform(ds, ed, o.t, o.t_prime) : orthogonalize(ed);
        report = despar_with_cv(td, ds.y, o.k_folds, o.grid_size, o.seed, o.level).ci;
    }
    print_report(std::cout, report);
    if (!o.out_path.empty()) write_report(o.out_path, o.format, report);
    return 0;
}

int run_simulate(const CommonOpts& o, int hd_p, int hd_inter, int hd_s,
                 double hd_rate, bool t3, bool serial) {
    if (o.method == "despar") {
        DesparTableConfig cfg;
        if (!o.n_values.empty()) cfg.n_values = o.n_values;
        cfg.reps = o.reps;
        cfg.seed = o.seed;
        cfg.p = hd_p;
        cfg.n_inter = hd_inter;
        cfg.s = hd_s;
        cfg.rate = hd_rate;
        cfg.t3_noise = t3;
        cfg.k_folds = o.k_folds;
        cfg.grid_size = o.grid_size;
        cfg.level = o.level;
        cfg.serial = serial;
        emit_summary(run_despar_table(cfg), o);
    } else if (o.method == "ols-plugin") {
        TableConfig cfg;
        cfg.scenario = scenario_from_name(o.scenario);
        if (!o.n_values.empty()) cfg.n_values = o.n_values;
        cfg.reps = o.reps;
        cfg.seed = o.seed;
        cfg.t = o.t;
        cfg.t_prime = o.t_prime;
        cfg.level = o.level;
        cfg.serial = serial;
        emit_summary(run_table(cfg), o);
    } else {
        throw ConfigError("unknown method: " + o.method);
    }
    return 0;
}

int run_sweep(const CommonOpts& o, const std::vector<double>& r_grid,
              const std::string& mode_name, int n, int bound_mc) {
    SweepMode mode;
    if (mode_name == "random")
        mode = SweepMode::Random;
    else if (mode_name == "worstcase")
        mode = SweepMode::WorstCase;
    else
        throw ConfigError("unknown sweep mode: " + mode_name);

    DgpSpec base;
    base.scenario = Scenario::LocalConfounded;
    base.n = n;
    SweepOptions opts;
    opts.reps = o.reps;
    opts.t = o.t;
    opts.t_prime = o.t_prime;
    opts.level = o.level;
    opts.bound_mc_n = bound_mc;
    const auto rows = confounding_sweep(base, r_grid, mode, o.seed, opts);
    if (o.out_path.empty())
        write_sweep_csv(std::cout, rows, base, o.seed, opts);
    else
        write_sweep_csv(o.out_path, rows, base, o.seed, opts);
    return 0;
}

int run_prop1check(const CommonOpts& o, const std::vector<double>& t_grid,
                   double x_value, int mc_n) {
    DgpSpec spec;
    spec.scenario = scenario_from_name(o.scenario);
    spec.n = 2;
    spec.seed = o.seed;
    auto [ds, oracle] = generate(spec);
    Eigen::RowVectorXd x(ds.d());
    x.setConstant(x_value);
    const Prop1Result res = prop1_check(oracle, t_grid, x, mc_n, o.seed);
    std::cout << std::setprecision(10)
              << "t,lhs,lhs_mc_se,rhs,gap\n";
    for (const auto& pt : res.points)
        std::cout << pt.t << ',' << pt.lhs << ',' << pt.lhs_mc_se << ','
                  << pt.rhs << ',' << pt.gap << '\n';
    std::cout << "# max_abs_gap=" << res.max_abs_gap << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
#ifdef _OPENMP
    omp_set_num_threads(increff::worker_count());
#endif

    CLI::App app{"Incremental-effect and ATE estimation for continuous treatments"};
    app.require_subcommand(1);
    app.set_config("--config", "",
                   "ini config file with one [subcommand] section per verb; flags override");

    CommonOpts o;
    std::string data_path;
    std::vector<double> r_grid{0.0, 0.2, 0.4, 0.6, 0.8};
    std::string sweep_mode = "random";
    int sweep_n = 100;
    int bound_mc = 20000;
    std::vector<double> t_grid{0.5, 1.5};
    double x_value = 0.0;
    int mc_n = 100000;
    int hd_p = 703, hd_inter = 36, hd_s = 26;
    double hd_rate = 3.1622776601683795;
    bool t3 = false, serial = false;

    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--seed", o.seed);
        cmd->add_option("--level", o.level)->check(CLI::Range(1e-9, 1.0 - 1e-9));
        cmd->add_option("--out", o.out_path);
        cmd->add_option("--format", o.format)
            ->check(CLI::IsMember({"csv", "markdown"}));
    };

    CLI::App* est = app.add_subcommand("estimate", "estimate from a CSV file");
    est->add_option("--data", data_path)->required();
    est->add_option("--basis", o.basis);
    est->add_option("--method", o.method);
    est->add_option("--estimand", o.estimand);
    est->add_option("--t", o.t);
    est->add_option("--tprime", o.t_prime);
    est->add_option("--kfolds", o.k_folds)->check(CLI::Range(2, 1000000));
    est->add_option("--grid", o.grid_size)->check(CLI::Range(2, 1000000));
    add_common(est);

    CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo replication table");
    sim->add_option("--scenario", o.scenario);
    sim->add_option("--n", o.n_values);
    sim->add_option("--reps", o.reps)->check(CLI::Range(1, 1000000));
    sim->add_option("--method", o.method);
    sim->add_option("--t", o.t);
    sim->add_option("--tprime", o.t_prime);
    sim->add_option("--kfolds", o.k_folds);
    sim->add_option("--grid", o.grid_size);
    sim->add_option("--p", hd_p);
    sim->add_option("--inter", hd_inter);
    sim->add_option("--s", hd_s);
    sim->add_option("--rate", hd_rate);
    sim->add_flag("--t3", t3);
    sim->add_flag("--serial", serial);
    add_common(sim);

    CLI::App* swp = app.add_subcommand("sweep", "confounding-ratio RMSE sweep");
    swp->add_option("--r", r_grid);
    swp->add_option("--mode", sweep_mode);
    swp->add_option("--n", sweep_n);
    swp->add_option("--reps", o.reps);
    swp->add_option("--t", o.t);
    swp->add_option("--tprime", o.t_prime);
    swp->add_option("--bound-mc", bound_mc);
    add_common(swp);

    CLI::App* p1 = app.add_subcommand("prop1check", "identification self-check");
    p1->add_option("--scenario", o.scenario);
    p1->add_option("--t", t_grid);
    p1->add_option("--x", x_value);
    p1->add_option("--mc", mc_n);
    add_common(p1);

    try {
        app.parse(argc, argv);
        o.has_t = est->count("--t") > 0;
        o.has_tprime = est->count("--tprime") > 0;
        if (est->parsed()) return run_estimate(o, data_path);
        if (sim->parsed())
            return run_simulate(o, hd_p, hd_inter, hd_s, hd_rate, t3, serial);
        if (swp->parsed()) return run_sweep(o, r_grid, sweep_mode, sweep_n, bound_mc);
        if (p1->parsed()) return run_prop1check(o, t_grid, x_value, mc_n);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const increff::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const increff::OracleError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const increff::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const increff::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
