#include "increff/plugin.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>

#include "increff/errors.hpp"

namespace increff {

EstimateReport linear_contrast_report(const OlsFit& fit,
                                      const Eigen::VectorXd& contrast, int n,
                                      double level, Estimand estimand,
                                      std::string method) {
    const int p = static_cast<int>(fit.beta.size());
    EstimateReport rep;
    rep.estimand = estimand;
    rep.point = contrast.dot(fit.beta);
    const double var =
        fit.sigma2_hat * contrast.dot(fit.xtx_inv * contrast);
    rep.std_error = std::sqrt(std::max(var, 0.0));
    rep.level = level;
    rep.method = std::move(method);
    rep.n = n;
    rep.p = p;
    const boost::math::students_t dist(static_cast<double>(n - p));
    const double q = boost::math::quantile(dist, 0.5 + level / 2.0);
    rep.ci_lower = rep.point - q * rep.std_error;
    rep.ci_upper = rep.point + q * rep.std_error;
    return rep;
}

EstimateReport incremental_plugin(const ExpandedDesign& ed,
                                  const Eigen::VectorXd& y, double level) {
    const OlsFit fit = ols_fit(ed.design, y);
    const Eigen::VectorXd c = mean_derivatives(ed);
    return linear_contrast_report(fit, c, static_cast<int>(ed.n()), level,
                                  Estimand::IncrementalFs, "ols-plugin");
}

EstimateReport ate_plugin(const Dataset& ds, const ExpandedDesign& ed,
                          const Eigen::VectorXd& y, double t, double t_prime,
                          double level) {
    if (t == t_prime)
        throw ConfigError("DegenerateContrast: t == t_prime == " +
                          std::to_string(t));
    const OlsFit fit = ols_fit(ed.design, y);
    const Eigen::VectorXd w =
        (eval_at_treatment(ds, ed.spec, t) - eval_at_treatment(ds, ed.spec, t_prime))
            .colwise()
            .mean();
    EstimateReport rep =
        linear_contrast_report(fit, w, static_cast<int>(ed.n()), level,
                               Estimand::Ate, "ols-plugin");
    rep.t = t;
    rep.t_prime = t_prime;
    return rep;
}

}  // namespace increff
