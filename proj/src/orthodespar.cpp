#include "increff/orthodespar.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>

#include "increff/errors.hpp"

namespace increff {

namespace {

TransformedDesign transform_with_loadings(const ExpandedDesign& ed,
                                          Eigen::MatrixXd loadings,
                                          double alpha1_expected) {
    ed.spec.check();
    const int tc = ed.spec.treatment_col();
    TransformedDesign td;
    td.design = ed.design;
    td.spec = ed.spec;
    td.treatment_col = tc;
    td.loadings = std::move(loadings);
    td.alpha = td.loadings.colwise().mean();
    td.alpha1 = td.alpha[tc];
    if (std::abs(td.alpha1 - alpha1_expected) > 1e-12 * std::max(1.0, std::abs(alpha1_expected)))
        throw ConfigError("TreatmentColumnMissing: loading mean on the "
                          "treatment column is " + std::to_string(td.alpha1));

    const Eigen::VectorXd x1 = ed.design.col(tc);
    td.xt = ed.design;
    for (Eigen::Index k = 0; k < td.xt.cols(); ++k) {
        if (k == tc) continue;
        td.xt.col(k) -= x1 * (td.alpha[k] / td.alpha1);
    }
    return td;
}

}  // namespace

TransformedDesign orthogonalize(const ExpandedDesign& ed) {
    TransformedDesign td = transform_with_loadings(ed, ed.deriv, 1.0);
    td.target = Estimand::IncrementalFs;
    return td;
}

TransformedDesign contrast_transform(const Dataset& ds,
                                     const ExpandedDesign& ed, double t,
                                     double t_prime) {
    if (t == t_prime)
        throw ConfigError("DegenerateContrast: t == t_prime == " +
                          std::to_string(t));
    const Eigen::MatrixXd contrasts = eval_at_treatment(ds, ed.spec, t) -
                                      eval_at_treatment(ds, ed.spec, t_prime);
    TransformedDesign td = transform_with_loadings(ed, contrasts, t - t_prime);
    td.target = Estimand::Ate;
    td.t = t;
    td.t_prime = t_prime;
    return td;
}

namespace {

Eigen::VectorXd penalty_weights_for(const BasisSpec& spec) {
    Eigen::VectorXd w = Eigen::VectorXd::Ones(spec.p());
    for (int k = 0; k < spec.p(); ++k)
        if (spec.terms[k].kind == BasisTerm::Kind::Intercept) w[k] = 0.0;
    return w;
}

Eigen::MatrixXd drop_column(const Eigen::MatrixXd& m, int col) {
    Eigen::MatrixXd out(m.rows(), m.cols() - 1);
    out.leftCols(col) = m.leftCols(col);
    out.rightCols(m.cols() - col - 1) = m.rightCols(m.cols() - col - 1);
    return out;
}

Eigen::VectorXd drop_entry(const Eigen::VectorXd& v, int k) {
    Eigen::VectorXd out(v.size() - 1);
    out.head(k) = v.head(k);
    out.tail(v.size() - k - 1) = v.tail(v.size() - k - 1);
    return out;
}

double empirical_variance(const Eigen::VectorXd& v) {
    const double m = v.mean();
    return (v.array() - m).square().mean();
}

}  // namespace

DesparResult despar_estimate(const TransformedDesign& td,
                             const Eigen::VectorXd& y, double lambda,
                             double lambda_x, double level) {
    if (lambda < 0.0 || lambda_x < 0.0)
        throw ConfigError("penalty levels must be >= 0");
    const Eigen::Index n = td.n();
    if (n < 3) throw NumericError("TooFewRows: despar needs n >= 3");
    const int tc = td.treatment_col;

    const Eigen::VectorXd x1 = td.xt.col(tc);
    const Eigen::MatrixXd controls = drop_column(td.xt, tc);
    const Eigen::VectorXd w_full = penalty_weights_for(td.spec);
    const Eigen::VectorXd w_controls = drop_entry(w_full, tc);

    DesparResult res;
    res.gamma_hat = lasso_fit(controls, x1, lambda_x, w_controls);
    res.beta_hat = lasso_fit(td.xt, y, lambda, w_full);

    res.z_tilde = x1 - controls * res.gamma_hat.beta;
    const double dn = static_cast<double>(n);
    res.zx1_inner = res.z_tilde.dot(x1) / dn;
    const double degenerate_scale = 1e-10 * x1.norm() * res.z_tilde.norm() / dn;
    if (std::abs(res.zx1_inner) <= degenerate_scale)
        throw NumericError(
            "DegenerateProjection: treatment column is fully explained by the "
            "controls; z'X1/n = " + std::to_string(res.zx1_inner));

    const double zx1 = res.z_tilde.dot(x1);
    double b1 = res.z_tilde.dot(y) / zx1;
    for (Eigen::Index k = 0; k < td.p(); ++k) {
        if (k == tc) continue;
        b1 -= res.z_tilde.dot(td.xt.col(k)) / zx1 * res.beta_hat.beta[k];
    }
    res.beta1_despar = b1;

    // Two-component variance: residual term plus per-row functional loading.
    const Eigen::VectorXd eps_hat = y - td.xt * res.beta_hat.beta;
    const Eigen::VectorXd deriv_term =
        (td.loadings / td.alpha1) * res.beta_hat.beta;
    const Eigen::VectorXd xi =
        eps_hat.cwiseProduct(res.z_tilde) / res.zx1_inner + deriv_term;
    res.u_hat2 = empirical_variance(xi);

    // The centered variant of xi subtracts the average loading as a
    // constant shift; its empirical variance must agree exactly.
    // Checked on every estimate.
    const Eigen::VectorXd xi_alt =
        eps_hat.cwiseProduct(res.z_tilde) / res.zx1_inner + deriv_term -
        Eigen::VectorXd::Constant(n, deriv_term.mean());
    const double u_alt = empirical_variance(xi_alt);
    if (std::abs(u_alt - res.u_hat2) >
        1e-10 * std::max(1.0, std::abs(res.u_hat2)))
        throw NumericError("variance identity violated: " +
                           std::to_string(res.u_hat2) + " vs " +
                           std::to_string(u_alt));

    EstimateReport rep;
    rep.estimand = td.target;
    rep.point = td.alpha1 * res.beta1_despar;
    rep.std_error = std::abs(td.alpha1) * std::sqrt(res.u_hat2 / dn);
    rep.level = level;
    rep.method = "despar";
    rep.n = static_cast<int>(n);
    rep.p = static_cast<int>(td.p());
    rep.t = td.t;
    rep.t_prime = td.t_prime;
    const boost::math::normal norm01;
    const double q = boost::math::quantile(norm01, 0.5 + level / 2.0);
    rep.ci_lower = rep.point - q * rep.std_error;
    rep.ci_upper = rep.point + q * rep.std_error;
    res.ci = rep;
    return res;
}

DesparResult despar_with_cv(const TransformedDesign& td,
                            const Eigen::VectorXd& y, int k_folds,
                            int grid_size, std::uint64_t seed, double level) {
    const int tc = td.treatment_col;
    const Eigen::VectorXd x1 = td.xt.col(tc);
    const Eigen::MatrixXd controls = drop_column(td.xt, tc);
    const Eigen::VectorXd w_full = penalty_weights_for(td.spec);
    const Eigen::VectorXd w_controls = drop_entry(w_full, tc);

    const CvResult cv_gamma =
        lasso_cv(controls, x1, w_controls, k_folds, grid_size, seed);
    const CvResult cv_beta =
        lasso_cv(td.xt, y, w_full, k_folds, grid_size, seed + 1);

    DesparResult res =
        despar_estimate(td, y, cv_beta.lambda_min, cv_gamma.lambda_min, level);
    res.cv_gamma = cv_gamma;
    res.cv_beta = cv_beta;
    return res;
}

}  // namespace increff
