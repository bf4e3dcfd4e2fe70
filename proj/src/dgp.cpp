#include "increff/dgp.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "increff/errors.hpp"

namespace increff {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kHalfNormalMean = std::sqrt(2.0 / M_PI);

// Student-t density with nu degrees of freedom, nu in {3, 4}.
double t_pdf(double u, int nu) {
    if (nu == 4) return (3.0 / 8.0) * std::pow(1.0 + u * u / 4.0, -2.5);
    // nu == 3: Gamma(2)/(sqrt(3 pi) Gamma(3/2)) = 2/(pi sqrt(3))
    return (2.0 / (M_PI * std::sqrt(3.0))) * std::pow(1.0 + u * u / 3.0, -2.0);
}

double t_score(double u, int nu) {
    // d/du log f_nu(u) = -(nu+1) u / (nu + u^2)
    return -(nu + 1.0) * u / (nu + u * u);
}

template <typename F>
double integrate_line(const F& f) {
    return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, -kInf, kInf, 12, 1e-8);
}

// Shared machinery of the t4 scenarios: t = h + e_t, x = h + e_x with all
// three t4-distributed. Conditioning integrals run over the latent h.
struct T4LatentModel {
    double a = 0.0, b = 0.0;  // f_conf interval; a == b means no confounding

    double weight(double h, double t, double x) const {
        return t_pdf(t - h, 4) * t_pdf(x - h, 4) * t_pdf(h, 4);
    }
    double density(double t, double x) const {
        return integrate_line([&](double h) { return weight(h, t, x); });
    }
    double conf_mean(double t, double x) const {
        const double num = integrate_line(
            [&](double h) { return f_conf(h, a, b) * weight(h, t, x); });
        return num / density(t, x);
    }
    double score_obs(double t, double x) const {
        const double num = integrate_line([&](double h) {
            return t_score(t - h, 4) * weight(h, t, x);
        });
        return num / density(t, x);
    }
};

void check_spec(const DgpSpec& spec) {
    if (spec.n < 1) throw ConfigError("InvalidParams: n must be >= 1");
    if (spec.scenario == Scenario::LocalConfounded && spec.conf_a > spec.conf_b)
        throw ConfigError("InvalidParams: LocalConfounded requires a <= b");
    if (spec.scenario == Scenario::SparseHighDim) {
        if (spec.hd_p < spec.hd_n_inter + 2)
            throw ConfigError("InvalidParams: hd_p too small");
        if (spec.hd_s < 0 || spec.hd_s > spec.hd_p)
            throw ConfigError("InvalidParams: hd_s must be in [0, hd_p]");
        if (spec.hd_rate <= 0.0)
            throw ConfigError("InvalidParams: hd_rate must be > 0");
        const int f = spec.hd_n_inter;
        if (f < 1) throw ConfigError("InvalidParams: hd_n_inter must be >= 1");
        if (spec.hd_n_main() < f)
            throw ConfigError(
                "InvalidParams: main-effect count must cover the factors");
        if (spec.hd_n_main() > f + f * (f - 1) / 2)
            throw ConfigError(
                "InvalidParams: main-effect count exceeds factors plus "
                "pairwise products");
    }
}

// Row slot layout for the analytic scenarios.
enum Slot : std::uint32_t { kH = 0, kEpsX = 1, kEpsT = 2, kEpsY = 3 };

OracleDgp make_oracle(const DgpSpec& spec);

}  // namespace

double f_conf(double h, double a, double b) {
    if (h < a) return 0.0;
    if (h < b) return h - a;
    return b - a;
}

std::string scenario_name(Scenario s) {
    switch (s) {
        case Scenario::GaussianCubic: return "gaussian-cubic";
        case Scenario::HeavyTailCubic: return "heavytail-cubic";
        case Scenario::SparseHighDim: return "sparse-highdim";
        case Scenario::LocalConfounded: return "local-confounded";
        case Scenario::Heteroscedastic: return "heteroscedastic";
        case Scenario::LocalIgnorability: return "local-ignorability";
    }
    return "?";
}

Scenario scenario_from_name(const std::string& name) {
    for (Scenario s : {Scenario::GaussianCubic, Scenario::HeavyTailCubic,
                       Scenario::SparseHighDim, Scenario::LocalConfounded,
                       Scenario::Heteroscedastic, Scenario::LocalIgnorability})
        if (scenario_name(s) == name) return s;
    throw ConfigError("unknown scenario: \"" + name + "\"");
}

double OracleDgp::m(double t, const Eigen::RowVectorXd& x, double h) const {
    if (!m_fn) throw OracleError("OracleUnavailable: m");
    return m_fn(t, x, h);
}
double OracleDgp::dm_dt(double t, const Eigen::RowVectorXd& x, double h) const {
    if (!dm_dt_fn) throw OracleError("OracleUnavailable: dm_dt");
    return dm_dt_fn(t, x, h);
}
double OracleDgp::m_obs(double t, const Eigen::RowVectorXd& x) const {
    if (!m_obs_fn) throw OracleError("OracleUnavailable: m_obs");
    return m_obs_fn(t, x);
}
double OracleDgp::dm_obs(double t, const Eigen::RowVectorXd& x) const {
    if (!dm_obs_fn) throw OracleError("OracleUnavailable: dm_obs");
    return dm_obs_fn(t, x);
}
double OracleDgp::score_obs(double t, const Eigen::RowVectorXd& x) const {
    if (!score_obs_fn) throw OracleError("OracleUnavailable: score_obs");
    return score_obs_fn(t, x);
}
double OracleDgp::score_full(double t, const Eigen::RowVectorXd& x,
                             double h) const {
    if (!score_full_fn) throw OracleError("OracleUnavailable: score_full");
    return score_full_fn(t, x, h);
}
double OracleDgp::sample_h(double t, const Eigen::RowVectorXd& x,
                           const CounterRng& rng, std::uint32_t slot) const {
    if (!sample_h_fn) throw OracleError("OracleUnavailable: sample_h");
    return sample_h_fn(t, x, rng, slot);
}

DrawnRow sample_row(const DgpSpec& spec, std::uint64_t row) {
    const CounterRng rng(spec.seed, row);
    DrawnRow r;
    switch (spec.scenario) {
        case Scenario::GaussianCubic:
        case Scenario::HeavyTailCubic:
        case Scenario::LocalConfounded: {
            const bool heavy = spec.scenario != Scenario::GaussianCubic;
            const double h = heavy ? rng.student_t(4, kH) : rng.normal(kH);
            const double ex = heavy ? rng.student_t(4, kEpsX) : rng.normal(kEpsX);
            const double et = heavy ? rng.student_t(4, kEpsT) : rng.normal(kEpsT);
            const double ey = rng.uniform_range(-0.5, 0.5, kEpsY);
            r.t = h + et;
            r.x.resize(1);
            r.x[0] = h + ex;
            r.h = h;
            r.has_h = true;
            r.y = 3.0 * r.t + r.t * r.t + r.x[0] + ey;
            if (spec.scenario == Scenario::LocalConfounded)
                r.y += f_conf(h, spec.conf_a, spec.conf_b);
            return r;
        }
        case Scenario::Heteroscedastic: {
            r.t = rng.uniform_range(-0.5, 1.5, 0);
            const double e = rng.uniform_range(-0.5, 0.5, 1);
            r.x.resize(0);
            r.y = r.t * r.t + std::abs(r.t) * e;
            return r;
        }
        case Scenario::LocalIgnorability: {
            const double eps = rng.normal(0);
            const double h = rng.normal(1);
            r.t = (h >= 0.0) ? std::abs(eps) : -std::abs(eps);
            r.h = h;
            r.has_h = true;
            r.x.resize(0);
            r.y = 2.0 * r.t + (r.t >= 1.0 ? (r.t - 1.0) * h : 0.0);
            return r;
        }
        case Scenario::SparseHighDim:
            throw ConfigError(
                "SparseHighDim rows depend on drawn coefficients; use "
                "sparse_highdim_generate");
    }
    throw ConfigError("InvalidParams: unknown scenario");
}

namespace {

OracleDgp make_oracle(const DgpSpec& spec) {
    OracleDgp o;
    o.spec = spec;
    switch (spec.scenario) {
        case Scenario::GaussianCubic: {
            o.has_h = true;
            o.m_fn = [](double t, const Eigen::RowVectorXd& x, double) {
                return 3.0 * t + t * t + x[0];
            };
            o.dm_dt_fn = [](double t, const Eigen::RowVectorXd&, double) {
                return 3.0 + 2.0 * t;
            };
            o.m_obs_fn = [](double t, const Eigen::RowVectorXd& x) {
                return 3.0 * t + t * t + x[0];
            };
            o.dm_obs_fn = [](double t, const Eigen::RowVectorXd&) {
                return 3.0 + 2.0 * t;
            };
            // t | x is N(x/2, 3/2); t | x,h is N(h, 1)
            o.score_obs_fn = [](double t, const Eigen::RowVectorXd& x) {
                return -(t - x[0] / 2.0) / 1.5;
            };
            o.score_full_fn = [](double t, const Eigen::RowVectorXd&, double h) {
                return -(t - h);
            };
            // h | t,x is N((t+x)/3, 1/3)
            o.sample_h_fn = [](double t, const Eigen::RowVectorXd& x,
                               const CounterRng& rng, std::uint32_t slot) {
                return (t + x[0]) / 3.0 +
                       std::sqrt(1.0 / 3.0) * rng.normal(slot);
            };
            break;
        }
        case Scenario::HeavyTailCubic:
        case Scenario::LocalConfounded: {
            o.has_h = true;
            const double a = spec.scenario == Scenario::LocalConfounded
                                 ? spec.conf_a : 0.0;
            const double b = spec.scenario == Scenario::LocalConfounded
                                 ? spec.conf_b : 0.0;
            const T4LatentModel model{a, b};
            o.m_fn = [a, b](double t, const Eigen::RowVectorXd& x, double h) {
                return 3.0 * t + t * t + f_conf(h, a, b) + x[0];
            };
            o.dm_dt_fn = [](double t, const Eigen::RowVectorXd&, double) {
                return 3.0 + 2.0 * t;
            };
            o.m_obs_fn = [model](double t, const Eigen::RowVectorXd& x) {
                const double g =
                    (model.a == model.b) ? 0.0 : model.conf_mean(t, x[0]);
                return 3.0 * t + t * t + x[0] + g;
            };
            if (a == b)  // confounding term absent; closed-form derivative
                o.dm_obs_fn = [](double t, const Eigen::RowVectorXd&) {
                    return 3.0 + 2.0 * t;
                };
            o.score_obs_fn = [model](double t, const Eigen::RowVectorXd& x) {
                return model.score_obs(t, x[0]);
            };
            o.score_full_fn = [](double t, const Eigen::RowVectorXd&, double h) {
                return t_score(t - h, 4);
            };
            break;
        }
        case Scenario::Heteroscedastic: {
            o.has_h = false;
            o.m_fn = [](double t, const Eigen::RowVectorXd&, double) {
                return t * t;
            };
            o.dm_dt_fn = [](double t, const Eigen::RowVectorXd&, double) {
                return 2.0 * t;
            };
            o.m_obs_fn = [](double t, const Eigen::RowVectorXd&) {
                return t * t;
            };
            o.dm_obs_fn = [](double t, const Eigen::RowVectorXd&) {
                return 2.0 * t;
            };
            // flat density on the support; no latent confounder
            o.score_obs_fn = [](double, const Eigen::RowVectorXd&) { return 0.0; };
            o.score_full_fn = [](double, const Eigen::RowVectorXd&, double) {
                return 0.0;
            };
            break;
        }
        case Scenario::LocalIgnorability: {
            o.has_h = true;
            o.m_fn = [](double t, const Eigen::RowVectorXd&, double h) {
                return 2.0 * t + (t >= 1.0 ? (t - 1.0) * h : 0.0);
            };
            o.dm_dt_fn = [](double t, const Eigen::RowVectorXd&, double h) {
                return 2.0 + (t >= 1.0 ? h : 0.0);
            };
            o.m_obs_fn = [](double t, const Eigen::RowVectorXd&) {
                // E[H | T=t] = sign(t) sqrt(2/pi); factor vanishes for t < 1
                return 2.0 * t +
                       (t >= 1.0 ? (t - 1.0) * kHalfNormalMean : 0.0);
            };
            o.dm_obs_fn = [](double t, const Eigen::RowVectorXd&) {
                return 2.0 + (t >= 1.0 ? kHalfNormalMean : 0.0);
            };
            // T is marginally N(0,1); given H its law is the half-normal on
            // the matching sign, whose log-density has the same derivative.
            o.score_obs_fn = [](double t, const Eigen::RowVectorXd&) {
                return -t;
            };
            o.score_full_fn = [](double t, const Eigen::RowVectorXd&, double) {
                return -t;
            };
            o.sample_h_fn = [](double t, const Eigen::RowVectorXd&,
                               const CounterRng& rng, std::uint32_t slot) {
                const double z = std::abs(rng.normal(slot));
                return t >= 0.0 ? z : -z;
            };
            break;
        }
        case Scenario::SparseHighDim:
            throw ConfigError("use sparse_highdim_generate");
    }
    const DgpSpec captured = spec;
    o.row_sampler = [captured](std::uint64_t row) {
        return sample_row(captured, row);
    };
    return o;
}

}  // namespace

std::pair<Dataset, OracleDgp> generate(const DgpSpec& spec) {
    check_spec(spec);
    if (spec.scenario == Scenario::SparseHighDim) {
        auto hd = sparse_highdim_generate(spec.n, spec.hd_p, spec.hd_s,
                                          spec.hd_rate, spec.seed,
                                          spec.hd_t3_noise, spec.hd_n_inter);
        return {std::move(hd.ds), std::move(hd.oracle)};
    }

    const int n = spec.n;
    const DrawnRow first = sample_row(spec, 0);
    const Eigen::Index d = first.x.size();

    Dataset ds;
    ds.y.resize(n);
    ds.t.resize(n);
    ds.x.resize(n, d);
    if (first.has_h) ds.h = Eigen::VectorXd(n);
    for (Eigen::Index k = 0; k < d; ++k)
        ds.covariate_names.push_back("x" + std::to_string(k + 1));

#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        const DrawnRow r = sample_row(spec, static_cast<std::uint64_t>(i));
        ds.y[i] = r.y;
        ds.t[i] = r.t;
        if (d > 0) ds.x.row(i) = r.x;
        if (ds.h) (*ds.h)[i] = r.h;
    }
    return {std::move(ds), make_oracle(spec)};
}

BasisSpec sparse_highdim_basis(int n_main, int n_inter) {
    BasisSpec spec;
    spec.include_intercept = true;
    spec.terms.push_back(BasisTerm::intercept());
    spec.terms.push_back(BasisTerm::treat_power(1));
    for (int m = 0; m < n_main; ++m)
        spec.terms.push_back(BasisTerm::cov_power(m, 1));
    for (int m = 0; m < n_inter; ++m)
        spec.terms.push_back(BasisTerm::interaction(m));
    spec.terms.push_back(BasisTerm::treat_power(2));
    spec.check();
    return spec;
}

SparseHighDimData sparse_highdim_generate(int n, int p, int s, double rate,
                                          std::uint64_t seed, bool t3_noise,
                                          int n_inter_in) {
    DgpSpec spec;
    spec.scenario = Scenario::SparseHighDim;
    spec.n = n;
    spec.seed = seed;
    spec.hd_p = p;
    spec.hd_n_inter = n_inter_in;
    spec.hd_s = s;
    spec.hd_rate = rate;
    spec.hd_t3_noise = t3_noise;
    check_spec(spec);

    const int n_main = spec.hd_n_main();
    const int n_inter = spec.hd_n_inter;

    // Coefficient draws live on a dedicated meta stream.
    const CounterRng meta(seed, /*stream=*/(1ULL << 40));

    auto pick_support = [&](int total, int size, std::uint32_t slot_base) {
        std::vector<int> idx(total);
        std::iota(idx.begin(), idx.end(), 0);
        for (int i = 0; i < size; ++i) {
            const auto j = i + meta.below(static_cast<std::uint64_t>(total - i),
                                          slot_base + static_cast<std::uint32_t>(i));
            std::swap(idx[i], idx[static_cast<int>(j)]);
        }
        idx.resize(size);
        return idx;
    };

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    {
        auto support = pick_support(p, s, 0);
        support.push_back(p - 1);  // quadratic term is always in the support
        for (int k : support)
            beta[k] = meta.exponential(rate, 2'000'000u + static_cast<std::uint32_t>(k));
    }
    Eigen::VectorXd gamma = Eigen::VectorXd::Zero(n_main);
    for (int k : pick_support(n_main, std::min(s, n_main), 1'000'000u))
        gamma[k] = meta.exponential(rate, 3'000'000u + static_cast<std::uint32_t>(k));

    const Eigen::VectorXd b_main = beta.head(n_main);
    const Eigen::VectorXd b_inter = beta.segment(n_main, n_inter);
    const double b_quad = beta[p - 1];

    Dataset ds;
    ds.y.resize(n);
    ds.t.resize(n);
    ds.x.resize(n, n_main);
    for (int k = 0; k < n_main; ++k)
        ds.covariate_names.push_back("x" + std::to_string(k + 1));

    constexpr std::uint32_t kSlotEpsT = 1u << 20;
    constexpr std::uint32_t kSlotEpsY = (1u << 20) + 1u;

    // Features mimic a transcription-factor activity matrix: n_inter
    // positive heavy-tailed factors (square-root transformed) followed by
    // their pairwise products, filled column-major until n_main columns.
    auto draw_row = [=](std::uint64_t row) {
        const CounterRng rng(seed, row);
        DrawnRow r;
        r.x.resize(n_main);
        constexpr double kFactorScale = 2.8;
        constexpr double kFactorCap = 10.0;  // winsorized t4 activity
        for (int k = 0; k < n_inter; ++k)
            r.x[k] = kFactorScale *
                     std::sqrt(std::min(kFactorCap,
                                        std::abs(rng.student_t(
                                            4, static_cast<std::uint32_t>(k)))));
        int col = n_inter;
        for (int i = 0; i < n_inter && col < n_main; ++i)
            for (int j = i + 1; j < n_inter && col < n_main; ++j)
                r.x[col++] = r.x[i] * r.x[j];
        const double eps_t = rng.normal(kSlotEpsT);
        const double eps_y =
            t3_noise ? rng.student_t(3, kSlotEpsY) : rng.normal(kSlotEpsY);
        r.t = r.x.dot(gamma) + eps_t;
        r.y = r.x.dot(b_main) + r.t * r.x.head(n_inter).dot(b_inter) +
              r.t * r.t * b_quad + eps_y;
        return r;
    };

#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        const DrawnRow r = draw_row(static_cast<std::uint64_t>(i));
        ds.y[i] = r.y;
        ds.t[i] = r.t;
        ds.x.row(i) = r.x;
    }

    OracleDgp o;
    o.spec = spec;
    o.has_h = false;
    o.m_fn = [=](double t, const Eigen::RowVectorXd& x, double) {
        return x.dot(b_main) + t * x.head(n_inter).dot(b_inter) +
               t * t * b_quad;
    };
    o.dm_dt_fn = [=](double t, const Eigen::RowVectorXd& x, double) {
        return x.head(n_inter).dot(b_inter) + 2.0 * t * b_quad;
    };
    o.m_obs_fn = [=](double t, const Eigen::RowVectorXd& x) {
        return x.dot(b_main) + t * x.head(n_inter).dot(b_inter) +
               t * t * b_quad;
    };
    o.dm_obs_fn = [=](double t, const Eigen::RowVectorXd& x) {
        return x.head(n_inter).dot(b_inter) + 2.0 * t * b_quad;
    };
    // t | x is the treatment noise law shifted by x'gamma
    o.score_obs_fn = [=](double t, const Eigen::RowVectorXd& x) {
        const double u = t - x.dot(gamma);
        return t3_noise ? t_score(u, 3) : -u;
    };
    o.score_full_fn = [=](double t, const Eigen::RowVectorXd& x, double) {
        const double u = t - x.dot(gamma);
        return t3_noise ? t_score(u, 3) : -u;
    };
    o.row_sampler = draw_row;

    SparseHighDimData out;
    out.ds = std::move(ds);
    out.oracle = std::move(o);
    out.true_beta = std::move(beta);
    out.true_gamma = std::move(gamma);
    return out;
}

double true_theta_fs(const OracleDgp& oracle, const Dataset& ds) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < ds.n(); ++i)
        acc += oracle.dm_dt(ds.t[i], ds.x.row(i),
                            ds.h ? (*ds.h)[i] : 0.0);
    return acc / static_cast<double>(ds.n());
}

double true_tau_fs(const OracleDgp& oracle, const Dataset& ds, double t,
                   double t_prime) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
        const double h = ds.h ? (*ds.h)[i] : 0.0;
        acc += oracle.m(t, ds.x.row(i), h) - oracle.m(t_prime, ds.x.row(i), h);
    }
    return acc / static_cast<double>(ds.n());
}

Prop1Result prop1_check(const OracleDgp& oracle,
                        const std::vector<double>& t_grid,
                        const Eigen::RowVectorXd& x_point, int mc_n,
                        std::uint64_t seed) {
    if (mc_n < 1) throw ConfigError("InvalidParams: mc_n must be >= 1");
    Prop1Result out;
    for (std::size_t gi = 0; gi < t_grid.size(); ++gi) {
        const double t = t_grid[gi];
        Prop1Point pt;
        pt.t = t;
        if (oracle.has_h) {
            if (!oracle.has_h_sampler())
                throw OracleError(
                    "OracleUnavailable: scenario lacks a conditional H sampler");
            double sum = 0.0, sumsq = 0.0;
#pragma omp parallel for reduction(+ : sum, sumsq) schedule(static)
            for (int j = 0; j < mc_n; ++j) {
                const CounterRng rng(seed, static_cast<std::uint64_t>(j));
                const double h = oracle.sample_h(t, x_point, rng,
                                                 static_cast<std::uint32_t>(gi));
                const double v = oracle.dm_dt(t, x_point, h);
                sum += v;
                sumsq += v * v;
            }
            pt.lhs = sum / mc_n;
            const double var = std::max(0.0, sumsq / mc_n - pt.lhs * pt.lhs);
            pt.lhs_mc_se = std::sqrt(var / mc_n);
        } else {
            pt.lhs = oracle.dm_dt(t, x_point, 0.0);
            pt.lhs_mc_se = 0.0;
        }
        const double step = 1e-4 * (1.0 + std::abs(t));
        pt.rhs = (oracle.m_obs(t + step, x_point) -
                  oracle.m_obs(t - step, x_point)) /
                 (2.0 * step);
        pt.gap = std::abs(pt.lhs - pt.rhs);
        out.max_abs_gap = std::max(out.max_abs_gap, pt.gap);
        out.points.push_back(pt);
    }
    return out;
}

void persist_with_metadata(const std::string& path, const Dataset& ds,
                           const DgpSpec& spec) {
    ColumnSchema schema;
    schema.covariate_names = ds.covariate_names;
    write_csv(path, ds, schema);
    std::ofstream meta(path + ".meta");
    if (!meta) throw DataError("cannot open file for writing: " + path + ".meta");
    meta << "scenario=" << scenario_name(spec.scenario) << '\n'
         << "n=" << spec.n << '\n'
         << "seed=" << spec.seed << '\n';
    if (spec.scenario == Scenario::LocalConfounded)
        meta << "conf_a=" << spec.conf_a << '\n'
             << "conf_b=" << spec.conf_b << '\n';
    if (spec.scenario == Scenario::SparseHighDim)
        meta << "hd_p=" << spec.hd_p << '\n'
             << "hd_s=" << spec.hd_s << '\n'
             << "hd_rate=" << spec.hd_rate << '\n'
             << "hd_t3_noise=" << (spec.hd_t3_noise ? 1 : 0) << '\n';
}

}  // namespace increff
