// Benchmarks the OpenMP replication harness against the serial reference
// path and checks that both produce identical summaries.
#include <chrono>
#include <iostream>
#include <sstream>

#include "increff/montecarlo.hpp"

using namespace increff;

namespace {

std::string render(const MonteCarloSummary& s) {
    std::ostringstream os;
    os.precision(17);
    write_summary_csv(os, s);
    return os.str();
}

double run_once(const TableConfig& cfg, std::string& out) {
    const auto t0 = std::chrono::steady_clock::now();
    out = render(run_table(cfg));
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    TableConfig cfg;
    cfg.scenario = Scenario::GaussianCubic;
    cfg.n_values = {50, 200};
    cfg.reps = argc > 1 ? std::atoi(argv[1]) : 2000;
    cfg.seed = 1;

    std::string parallel_out, serial_out;
    cfg.serial = false;
    const double t_par = run_once(cfg, parallel_out);
    cfg.serial = true;
    const double t_ser = run_once(cfg, serial_out);

    std::cout << "workers=" << worker_count() << " reps=" << cfg.reps << '\n'
              << "parallel_s=" << t_par << '\n'
              << "serial_s=" << t_ser << '\n'
              << "speedup=" << t_ser / t_par << '\n';
    if (parallel_out != serial_out) {
        std::cout << "MISMATCH: parallel and serial summaries differ\n";
        return 1;
    }
    std::cout << "outputs identical\n";
    return 0;
}
