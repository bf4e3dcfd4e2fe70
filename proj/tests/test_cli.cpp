#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

namespace {

const std::string kCli = INCREFF_CLI_PATH;

struct RunResult {
    int exit_code = -1;
    std::string out;
};

RunResult run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " " + kCli + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult res;
    std::array<char, 4096> buf;
    size_t got;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0)
        res.out.append(buf.data(), got);
    const int status = pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

void write_file(const std::string& path, const std::string& body) {
    std::ofstream out(path);
    out << body;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// y = 2t + x1, noiseless; cubic-free basis keeps the fit exact
void write_linear_csv(const std::string& path) {
    std::ostringstream body;
    body << "y,t,x1\n";
    for (int i = 0; i < 20; ++i) {
        const double t = 0.1 * i - 1.0;
        const double x = 0.3 * ((i * 7) % 5) - 0.6;
        body << 2.0 * t + x << ',' << t << ',' << x << '\n';
    }
    write_file(path, body.str());
}

double parse_key(const std::string& out, const std::string& key) {
    const auto pos = out.find(key + "=");
    REQUIRE(pos != std::string::npos);
    return std::stod(out.substr(pos + key.size() + 1));
}

}  // namespace

TEST_CASE("estimate recovers an exact linear effect") {
    write_linear_csv("cli_linear.csv");
    const RunResult r = run(
        "estimate --data cli_linear.csv --basis \"1 + t + x1\" "
        "--method ols-plugin --estimand incremental");
    CHECK(r.exit_code == 0);
    CHECK(parse_key(r.out, "point") == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(r.out.find("method=ols-plugin") != std::string::npos);
    CHECK(r.out.find("estimand=incremental") != std::string::npos);

    // byte-identical re-run
    const RunResult again = run(
        "estimate --data cli_linear.csv --basis \"1 + t + x1\" "
        "--method ols-plugin --estimand incremental");
    CHECK(again.out == r.out);
    std::remove("cli_linear.csv");
}

TEST_CASE("estimate ate reports the contrast and levels") {
    write_linear_csv("cli_ate.csv");
    const RunResult r = run(
        "estimate --data cli_ate.csv --basis \"1 + t + x1\" --estimand ate "
        "--t 1 --tprime 0");
    CHECK(r.exit_code == 0);
    CHECK(parse_key(r.out, "point") == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(r.out.find("t=1") != std::string::npos);
    CHECK(r.out.find("tprime=0") != std::string::npos);
    std::remove("cli_ate.csv");
}

TEST_CASE("config errors exit with code 2") {
    write_linear_csv("cli_cfg.csv");
    // ate without contrast levels
    CHECK(run("estimate --data cli_cfg.csv --basis \"1 + t + x1\" "
              "--estimand ate").exit_code == 2);
    // equal contrast levels
    CHECK(run("estimate --data cli_cfg.csv --basis \"1 + t + x1\" "
              "--estimand ate --t 1 --tprime 1").exit_code == 2);
    // missing basis
    CHECK(run("estimate --data cli_cfg.csv").exit_code == 2);
    // malformed basis
    CHECK(run("estimate --data cli_cfg.csv --basis \"1 + banana\"").exit_code ==
          2);
    // unknown flag is a parse error
    CHECK(run("estimate --data cli_cfg.csv --nonsense 1").exit_code == 2);
    // unknown scenario
    CHECK(run("simulate --scenario banana --reps 2 --n 10").exit_code == 2);
    std::remove("cli_cfg.csv");
}

TEST_CASE("data errors exit with code 3") {
    CHECK(run("estimate --data no_such_file.csv --basis \"1 + t\"").exit_code ==
          3);
    write_file("cli_bad.csv", "y,t\n1,abc\n");
    CHECK(run("estimate --data cli_bad.csv --basis \"1 + t\"").exit_code == 3);
    std::remove("cli_bad.csv");
}

TEST_CASE("numeric errors exit with code 4") {
    // constant covariate makes the design rank deficient with an intercept
    std::ostringstream body;
    body << "y,t,x1\n";
    for (int i = 0; i < 12; ++i) body << i << ',' << 0.5 * i << ",1\n";
    write_file("cli_rank.csv", body.str());
    CHECK(run("estimate --data cli_rank.csv --basis \"1 + t + x1\"").exit_code ==
          4);
    std::remove("cli_rank.csv");
}

TEST_CASE("simulate writes a versioned reproducible table") {
    const std::string args =
        "simulate --scenario gaussian-cubic --n 10 --n 20 --reps 25 --seed 5 "
        "--method ols-plugin --out cli_tab.csv";
    CHECK(run(args).exit_code == 0);
    const std::string first = slurp("cli_tab.csv");
    CHECK(first.find("# version=increff-1.0") != std::string::npos);
    CHECK(first.find("# scenario=gaussian-cubic") != std::string::npos);
    CHECK(first.find("# seed=5") != std::string::npos);
    CHECK(run(args).exit_code == 0);
    CHECK(slurp("cli_tab.csv") == first);

    // worker cap must not change the numbers
    CHECK(run(args, "INCREFF_THREADS=1").exit_code == 0);
    CHECK(slurp("cli_tab.csv") == first);
    CHECK(run(args + " --serial").exit_code == 0);
    CHECK(slurp("cli_tab.csv") == first);
    std::remove("cli_tab.csv");
}

TEST_CASE("markdown format is honored") {
    CHECK(run("simulate --n 10 --reps 5 --format markdown --out cli_tab.md")
              .exit_code == 0);
    const std::string body = slurp("cli_tab.md");
    CHECK(body.find("| n |") != std::string::npos);
    std::remove("cli_tab.md");
    CHECK(run("simulate --n 10 --reps 5 --format yaml").exit_code == 2);
}

TEST_CASE("config file supplies flags") {
    write_linear_csv("cli_conf_data.csv");
    write_file("cli_conf.ini",
               "[estimate]\ndata=cli_conf_data.csv\nbasis=\"1 + t + x1\"\n"
               "method=ols-plugin\nestimand=incremental\n");
    const RunResult via_config = run("--config cli_conf.ini estimate");
    const RunResult via_flags = run(
        "estimate --data cli_conf_data.csv --basis \"1 + t + x1\" "
        "--method ols-plugin --estimand incremental");
    CHECK(via_config.exit_code == 0);
    CHECK(via_config.out == via_flags.out);
    std::remove("cli_conf.ini");
    std::remove("cli_conf_data.csv");
}

TEST_CASE("despar estimate handles more basis terms than rows") {
    // 16 covariates, quadratic expansion: p = 2 + 32 > n = 25
    std::ostringstream body;
    body << "y,t";
    for (int k = 1; k <= 16; ++k) body << ",x" << k;
    body << '\n';
    unsigned state = 9;
    auto next = [&state]() {
        state = state * 1664525u + 1013904223u;
        return static_cast<double>(state >> 8) / 16777216.0 - 0.5;
    };
    for (int i = 0; i < 25; ++i) {
        const double t = next();
        double y = 1.5 * t;
        std::ostringstream row;
        for (int k = 0; k < 16; ++k) {
            const double x = next();
            row << ',' << x;
            if (k == 0) y += x;
        }
        body << y + 0.01 * next() << ',' << t << row.str() << '\n';
    }
    write_file("cli_hd.csv", body.str());
    std::ostringstream basis;
    basis << "1 + t";
    for (int k = 1; k <= 16; ++k) basis << " + x" << k << " + x" << k << "^2";
    const RunResult r = run("estimate --data cli_hd.csv --basis \"" +
                            basis.str() +
                            "\" --method despar --kfolds 3 --grid 8 --seed 2");
    CHECK(r.exit_code == 0);
    CHECK(parse_key(r.out, "std_error") > 0.0);
    CHECK(std::isfinite(parse_key(r.out, "point")));
    CHECK(r.out.find("method=despar") != std::string::npos);
    std::remove("cli_hd.csv");
}

TEST_CASE("prop1check reports a small gap for the gaussian scenario") {
    const RunResult r =
        run("prop1check --scenario gaussian-cubic --t 0.5 --t 1.5 --x 0.3 "
            "--mc 2000 --seed 3");
    CHECK(r.exit_code == 0);
    const auto pos = r.out.find("# max_abs_gap=");
    REQUIRE(pos != std::string::npos);
    CHECK(std::stod(r.out.substr(pos + 14)) < 1e-6);
}

TEST_CASE("sweep emits the csv contract") {
    const RunResult r =
        run("sweep --r 0 --r 0.3 --mode random --n 30 --reps 5 --bound-mc 200 "
            "--seed 4");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("# interval_convention=t4-quantile") != std::string::npos);
    CHECK(r.out.find("r,mode,rmse_incr") != std::string::npos);
}
