#pragma once

#include <optional>

#include "increff/basis.hpp"
#include "increff/plugin.hpp"
#include "increff/regress.hpp"

namespace increff {

// Design after the incremental-effect orthogonalization: the treatment
// column is kept raw and every other column k is replaced by
// X_k - t * alpha_k, which makes the target functional the coefficient on
// the treatment column. `loadings` holds the per-row functional loadings
// L(i,k) (treatment derivatives for the incremental target, level contrasts
// for the ATE target); alpha is its column mean and alpha1 the normalizer
// (1 for incremental, t - t' for a contrast).
struct TransformedDesign {
    Eigen::MatrixXd xt;
    Eigen::VectorXd alpha;
    Eigen::MatrixXd loadings;
    Eigen::MatrixXd design;  // untransformed source design
    BasisSpec spec;
    int treatment_col = 0;
    double alpha1 = 1.0;
    Estimand target = Estimand::IncrementalFs;
    double t = 0.0, t_prime = 0.0;  // contrast levels, ATE target only

    Eigen::Index n() const { return xt.rows(); }
    Eigen::Index p() const { return xt.cols(); }
};

// The incremental-effect transform (loadings = treatment derivatives).
// Throws ConfigError("TreatmentColumnMissing") when the design's first
// non-intercept column is not the raw treatment.
TransformedDesign orthogonalize(const ExpandedDesign& ed);

// Analogous transform for the fixed-levels contrast tau(t, t'): loadings
// L(i,k) = b_k(t, x_i) - b_k(t', x_i).
TransformedDesign contrast_transform(const Dataset& ds,
                                     const ExpandedDesign& ed, double t,
                                     double t_prime);

struct DesparResult {
    double beta1_despar = 0.0;  // debiased coefficient on the treatment column
    double u_hat2 = 0.0;        // asymptotic variance estimate
    LassoFit gamma_hat;         // treatment-on-controls lasso
    LassoFit beta_hat;          // outcome lasso
    Eigen::VectorXd z_tilde;    // projection residual X_1 - Xt_{-1} gamma
    double zx1_inner = 0.0;     // z_tilde' X_1 / n
    EstimateReport ci;          // point = alpha1 * beta1_despar, normal CI
    std::optional<CvResult> cv_gamma;
    std::optional<CvResult> cv_beta;
};

// Desparsified-lasso estimate of the transformed first coefficient with the
// two-component variance u^2. Intercept columns are unpenalized in both
// lasso problems. Throws NumericError("DegenerateProjection") when
// |z' X_1 / n| falls below 1e-10 * ||X_1|| * ||z|| / n.
DesparResult despar_estimate(const TransformedDesign& td,
                             const Eigen::VectorXd& y, double lambda,
                             double lambda_x, double level = 0.95);

// Cross-validates the two penalty levels separately, then delegates to
// despar_estimate. Deterministic for a fixed seed.
DesparResult despar_with_cv(const TransformedDesign& td,
                            const Eigen::VectorXd& y, int k_folds,
                            int grid_size, std::uint64_t seed,
                            double level = 0.95);

}  // namespace increff
