#include "increff/regress.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "increff/errors.hpp"
#include "increff/rng.hpp"

namespace increff {

OlsFit ols_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& y) {
    const Eigen::Index n = design.rows();
    const Eigen::Index p = design.cols();
    if (n <= p)
        throw NumericError("TooFewRows: n = " + std::to_string(n) +
                           " <= p = " + std::to_string(p));

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    const Eigen::Index rank = qr.rank();
    if (rank < p)
        throw NumericError("RankDeficient(" + std::to_string(rank) +
                           "): design has " + std::to_string(p) + " columns");

    OlsFit fit;
    fit.beta = qr.solve(y);
    fit.residuals = y - design * fit.beta;
    fit.sigma2_hat = fit.residuals.squaredNorm() / static_cast<double>(n - p);

    // (X'X)^-1 from the factorization: X P = Q R, so
    // (X'X)^-1 = P R^-1 R^-T P'.
    const Eigen::MatrixXd r =
        qr.matrixQR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd rinv =
        r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
    fit.xtx_inv = qr.colsPermutation() * (rinv * rinv.transpose()) *
                  qr.colsPermutation().transpose();
    return fit;
}

namespace detail {

// Scales penalized columns to unit empirical second moment. scale[k] = 1 for
// unpenalized or identically-zero columns.
struct Standardized {
    Eigen::MatrixXd x;
    Eigen::VectorXd scale;
    Eigen::VectorXd col_sq_norm;  // X_k' X_k / n after scaling
};

Standardized standardize(const Eigen::MatrixXd& design,
                         const Eigen::VectorXd& weights) {
    const Eigen::Index n = design.rows();
    const Eigen::Index p = design.cols();
    Standardized s;
    s.x = design;
    s.scale = Eigen::VectorXd::Ones(p);
    for (Eigen::Index k = 0; k < p; ++k) {
        if (weights[k] <= 0.0) continue;
        const double m2 = design.col(k).squaredNorm() / static_cast<double>(n);
        if (m2 > 0.0) {
            s.scale[k] = std::sqrt(m2);
            s.x.col(k) /= s.scale[k];
        }
    }
    s.col_sq_norm.resize(p);
    for (Eigen::Index k = 0; k < p; ++k)
        s.col_sq_norm[k] = s.x.col(k).squaredNorm() / static_cast<double>(n);
    return s;
}

inline double soft_threshold(double z, double g) {
    if (z > g) return z - g;
    if (z < -g) return z + g;
    return 0.0;
}

// One coordinate-descent sweep over `cols`; returns the largest coefficient
// change. Residual r is kept in sync with beta.
double sweep(const Standardized& s, const Eigen::VectorXd& weights,
             double lambda, const std::vector<Eigen::Index>& cols,
             Eigen::VectorXd& beta, Eigen::VectorXd& r) {
    const double n = static_cast<double>(s.x.rows());
    double max_delta = 0.0;
    for (const Eigen::Index k : cols) {
        const double g = s.col_sq_norm[k];
        if (g <= 0.0) continue;
        const double old = beta[k];
        const double z = s.x.col(k).dot(r) / n + g * old;
        double next;
        if (weights[k] > 0.0)
            next = soft_threshold(z, lambda * weights[k]) / g;
        else
            next = z / g;
        if (next != old) {
            r -= s.x.col(k) * (next - old);
            beta[k] = next;
            max_delta = std::max(max_delta, std::abs(next - old));
        }
    }
    return max_delta;
}

// Coordinate descent with active-set iteration on standardized data.
// `beta` is used as the warm start.
void cd_solve(const Standardized& s, const Eigen::VectorXd& y,
              double lambda, const Eigen::VectorXd& weights,
              const LassoOptions& opts, Eigen::VectorXd& beta,
              Eigen::VectorXd& r, int& total_sweeps, bool& converged) {
    const Eigen::Index p = s.x.cols();
    std::vector<Eigen::Index> all(p);
    std::iota(all.begin(), all.end(), Eigen::Index{0});

    r = y - s.x * beta;
    total_sweeps = 0;
    converged = false;
    while (total_sweeps < opts.max_sweeps) {
        const double full_delta = sweep(s, weights, lambda, all, beta, r);
        ++total_sweeps;
        const double thresh = opts.tol * std::max(1.0, beta.lpNorm<Eigen::Infinity>());
        if (full_delta <= thresh) {
            converged = true;
            return;
        }
        // iterate on the active set until it stabilizes
        std::vector<Eigen::Index> active;
        for (Eigen::Index k = 0; k < p; ++k)
            if (beta[k] != 0.0 || weights[k] <= 0.0) active.push_back(k);
        while (total_sweeps < opts.max_sweeps) {
            const double d = sweep(s, weights, lambda, active, beta, r);
            ++total_sweeps;
            if (d <= opts.tol * std::max(1.0, beta.lpNorm<Eigen::Infinity>()))
                break;
        }
    }
}

Eigen::VectorXd grid_from_max(double lambda_max, int grid_size) {
    Eigen::VectorXd grid(grid_size);
    if (grid_size == 1) {
        grid[0] = lambda_max;
        return grid;
    }
    const double lo = std::log(lambda_max * 1e-4);
    const double hi = std::log(lambda_max);
    for (int i = 0; i < grid_size; ++i)
        grid[i] = std::exp(hi + (lo - hi) * static_cast<double>(i) /
                                    static_cast<double>(grid_size - 1));
    return grid;
}

double lambda_max_of(const Standardized& s, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& weights) {
    const double n = static_cast<double>(s.x.rows());
    double m = 0.0;
    for (Eigen::Index k = 0; k < s.x.cols(); ++k)
        if (weights[k] > 0.0)
            m = std::max(m, std::abs(s.x.col(k).dot(y)) / (n * weights[k]));
    return m > 0.0 ? m : 1.0;
}

}  // namespace detail

LassoFit lasso_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                   double lambda, const Eigen::VectorXd& penalty_weights,
                   const LassoOptions& opts) {
    if (lambda < 0.0) throw ConfigError("lambda must be >= 0");
    if (penalty_weights.size() != design.cols())
        throw ConfigError("penalty weight length does not match design columns");
    if ((penalty_weights.array() < 0.0).any())
        throw ConfigError("penalty weights must be >= 0");

    const auto s = detail::standardize(design, penalty_weights);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(design.cols());
    Eigen::VectorXd r;
    LassoFit fit;
    detail::cd_solve(s, y, lambda, penalty_weights, opts, beta, r, fit.n_iter,
                     fit.converged);
    fit.lambda = lambda;
    fit.beta = beta.cwiseQuotient(s.scale);
    fit.residuals = r;
    return fit;
}

LassoFit lasso_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                   double lambda) {
    return lasso_fit(design, y, lambda,
                     Eigen::VectorXd::Ones(design.cols()));
}

CvResult lasso_cv(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                  const Eigen::VectorXd& penalty_weights, int k_folds,
                  int grid_size, std::uint64_t rng_seed) {
    const Eigen::Index n = design.rows();
    const Eigen::Index p = design.cols();
    if (k_folds < 2) throw ConfigError("k_folds must be >= 2");
    if (n < k_folds)
        throw NumericError("TooFewRows: n = " + std::to_string(n) +
                           " < k_folds = " + std::to_string(k_folds));
    if (grid_size < 1) throw ConfigError("grid_size must be >= 1");

    const auto s_full = detail::standardize(design, penalty_weights);
    const double lambda_max = detail::lambda_max_of(s_full, y, penalty_weights);
    const Eigen::VectorXd grid = detail::grid_from_max(lambda_max, grid_size);

    // fold assignment fixed by the seed before any parallel work
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    seeded_shuffle(order, CounterRng(rng_seed, /*stream=*/0xCFULL));
    std::vector<int> fold_of(n);
    for (Eigen::Index i = 0; i < n; ++i)
        fold_of[order[i]] = static_cast<int>(i % k_folds);

    Eigen::MatrixXd fold_mse = Eigen::MatrixXd::Zero(grid_size, k_folds);

#pragma omp parallel for schedule(dynamic)
    for (int f = 0; f < k_folds; ++f) {
        std::vector<Eigen::Index> train, test;
        for (Eigen::Index i = 0; i < n; ++i)
            (fold_of[i] == f ? test : train).push_back(i);

        Eigen::MatrixXd xtr(train.size(), p), xte(test.size(), p);
        Eigen::VectorXd ytr(train.size()), yte(test.size());
        for (std::size_t i = 0; i < train.size(); ++i) {
            xtr.row(static_cast<Eigen::Index>(i)) = design.row(train[i]);
            ytr[static_cast<Eigen::Index>(i)] = y[train[i]];
        }
        for (std::size_t i = 0; i < test.size(); ++i) {
            xte.row(static_cast<Eigen::Index>(i)) = design.row(test[i]);
            yte[static_cast<Eigen::Index>(i)] = y[test[i]];
        }

        const auto s = detail::standardize(xtr, penalty_weights);
        Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
        Eigen::VectorXd r;
        // fold fits only score out-of-fold MSE; a looser tolerance and a
        // sweep cap per grid point keep the small-lambda end of the path
        // from dominating the runtime
        LassoOptions opts;
        opts.tol = 1e-5;
        opts.max_sweeps = 100;
        for (int gi = 0; gi < grid_size; ++gi) {  // warm starts down the path
            int sweeps = 0;
            bool conv = false;
            detail::cd_solve(s, ytr, grid[gi], penalty_weights, opts, beta, r,
                             sweeps, conv);
            const Eigen::VectorXd beta_orig = beta.cwiseQuotient(s.scale);
            fold_mse(gi, f) =
                (yte - xte * beta_orig).squaredNorm() /
                static_cast<double>(test.size());
            // once the fit saturates the training rows, smaller lambdas
            // only interpolate; carry the current score forward
            if ((beta.array() != 0.0).count() >=
                static_cast<Eigen::Index>(train.size())) {
                for (int rest = gi + 1; rest < grid_size; ++rest)
                    fold_mse(rest, f) = fold_mse(gi, f);
                break;
            }
        }
    }

    CvResult cv;
    cv.lambda_grid = grid;
    cv.cv_error = fold_mse.rowwise().mean();
    Eigen::Index best = 0;
    cv.cv_error.minCoeff(&best);
    cv.lambda_min = grid[best];
    return cv;
}

CvResult lasso_cv(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                  int k_folds, int grid_size, std::uint64_t rng_seed) {
    return lasso_cv(design, y, Eigen::VectorXd::Ones(design.cols()), k_folds,
                    grid_size, rng_seed);
}

}  // namespace increff
