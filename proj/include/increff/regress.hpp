#pragma once

#include <Eigen/Dense>

namespace increff {

struct OlsFit {
    Eigen::VectorXd beta;
    Eigen::VectorXd residuals;
    double sigma2_hat = 0.0;   // RSS / (n - p)
    Eigen::MatrixXd xtx_inv;   // (X'X)^-1
};

// Least squares via Householder QR (numerical rank checked with relative
// tolerance 1e-10). Throws NumericError("TooFewRows") when n <= p and
// NumericError("RankDeficient(r)") on collinear designs.
OlsFit ols_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& y);

struct LassoFit {
    Eigen::VectorXd beta;
    double lambda = 0.0;
    Eigen::VectorXd residuals;
    int n_iter = 0;
    bool converged = true;
};

struct LassoOptions {
    double tol = 1e-7;     // max coefficient change per sweep, relative
    int max_sweeps = 100000;
};

// Coordinate descent for (1/n)||y - X b||^2 + 2 lambda sum_k w_k |b_k|.
// Penalized columns are internally scaled to unit empirical second moment
// and coefficients back-transformed, so a single lambda is meaningful across
// heterogeneous basis scales. A weight of 0 leaves the column unpenalized
// (used for the intercept). Non-convergence is reported via converged=false.
LassoFit lasso_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                   double lambda, const Eigen::VectorXd& penalty_weights,
                   const LassoOptions& opts = {});

LassoFit lasso_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                   double lambda);

struct CvResult {
    Eigen::VectorXd lambda_grid;  // descending
    Eigen::VectorXd cv_error;     // mean out-of-fold MSE per grid point
    double lambda_min = 0.0;
};

// K-fold cross-validation over a log-spaced grid [lambda_max * 1e-4,
// lambda_max] with lambda_max = max_k |X_k' y| / n over penalized columns
// (computed on the solver's standardized scale). Fold assignment comes from
// a seeded shuffle, so the result is a pure function of the inputs.
CvResult lasso_cv(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                  const Eigen::VectorXd& penalty_weights, int k_folds,
                  int grid_size, std::uint64_t rng_seed);

CvResult lasso_cv(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                  int k_folds = 10, int grid_size = 100,
                  std::uint64_t rng_seed = 0);

}  // namespace increff
