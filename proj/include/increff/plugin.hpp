#pragma once

#include <string>

#include "increff/basis.hpp"
#include "increff/regress.hpp"

namespace increff {

enum class Estimand { IncrementalFs, IncrementalSp, Ate };

struct EstimateReport {
    Estimand estimand = Estimand::IncrementalFs;
    double point = 0.0;
    double std_error = 0.0;
    double ci_lower = 0.0;
    double ci_upper = 0.0;
    double level = 0.95;
    std::string method;
    int n = 0;
    int p = 0;
    double t = 0.0;        // contrast levels, ATE only
    double t_prime = 0.0;
};

// Average-derivative plug-in: OLS fit on the expanded design, point estimate
// c'beta with c the mean derivative vector, Student-t confidence interval
// with n-p degrees of freedom.
EstimateReport incremental_plugin(const ExpandedDesign& ed,
                                  const Eigen::VectorXd& y,
                                  double level = 0.95);

// Sample ATE plug-in: contrast w_k = mean_i [b_k(t,x_i) - b_k(t',x_i)]
// applied to the same OLS fit. Throws ConfigError("DegenerateContrast")
// when t == t_prime.
EstimateReport ate_plugin(const Dataset& ds, const ExpandedDesign& ed,
                          const Eigen::VectorXd& y, double t, double t_prime,
                          double level = 0.95);

// Generic linear-functional report for a fitted OLS model and contrast c:
// point = c'beta, SE = sqrt(sigma2 * c' (X'X)^-1 c).
EstimateReport linear_contrast_report(const OlsFit& fit,
                                      const Eigen::VectorXd& contrast, int n,
                                      double level, Estimand estimand,
                                      std::string method);

}  // namespace increff
