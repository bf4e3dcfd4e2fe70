#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "increff/dataset.hpp"

namespace increff {

// One basis function b(t, x) with its analytic treatment derivative.
// Estimator correctness depends on the derivative being exact, so custom
// terms must supply both evaluators.
struct BasisTerm {
    enum class Kind { Intercept, TreatPower, CovPower, TreatCovInteraction, Custom };

    Kind kind = Kind::Intercept;
    int cov_index = -1;  // 0-based covariate index, for CovPower / interaction
    int exponent = 1;    // for TreatPower / CovPower
    std::string label;

    using Eval = std::function<double(double t, const Eigen::RowVectorXd& x)>;
    Eval custom_eval;
    Eval custom_deriv;

    double eval(double t, const Eigen::RowVectorXd& x) const;
    double deriv(double t, const Eigen::RowVectorXd& x) const;

    static BasisTerm intercept();
    static BasisTerm treat_power(int exponent);
    static BasisTerm cov_power(int cov_index, int exponent);
    static BasisTerm interaction(int cov_index);
    static BasisTerm custom(std::string label, Eval eval, Eval deriv);

    bool operator==(const BasisTerm& o) const {
        return kind == o.kind && cov_index == o.cov_index &&
               exponent == o.exponent && label == o.label;
    }
};

// Ordered basis b_1,...,b_p. The first non-intercept term must be the raw
// treatment b_1(t,x) = t; the orthogonalization step relies on it.
struct BasisSpec {
    std::vector<BasisTerm> terms;  // includes the intercept when present
    bool include_intercept = true;

    // Column index of the raw treatment term.
    int treatment_col() const { return include_intercept ? 1 : 0; }
    int p() const { return static_cast<int>(terms.size()); }

    // Parses e.g. "1 + t + t^2 + t^3 + x1 + x1^2 + t*x1". Covariates are
    // named x1..xd (1-based). '1' is the intercept.
    static BasisSpec parse(const std::string& text);
    std::string to_string() const;

    // The cubic model used throughout the low-dimensional experiments:
    // 1 + t + t^2 + t^3 + x_m + x_m^2 for every covariate m.
    static BasisSpec cubic(int n_covariates);

    // Throws ConfigError if the term list is empty, has duplicates, or the
    // treatment term is missing/misplaced.
    void check() const;
};

// Evaluated design: design(i,k) = b_k(t_i, x_i), deriv(i,k) = d/dt b_k(t_i, x_i).
struct ExpandedDesign {
    Eigen::MatrixXd design;
    Eigen::MatrixXd deriv;
    BasisSpec spec;

    Eigen::Index n() const { return design.rows(); }
    Eigen::Index p() const { return design.cols(); }
};

// Fills design and deriv in spec order. Rows are processed in parallel;
// output is deterministic. Throws ConfigError when a covariate index in the
// spec is out of range for the dataset.
ExpandedDesign expand(const Dataset& ds, const BasisSpec& spec);

// Column means of the derivative matrix (the transform coefficients alpha_k).
Eigen::VectorXd mean_derivatives(const ExpandedDesign& ed);

// design matrix with the treatment frozen at a fixed level: entry (i,k) =
// b_k(t_fixed, x_i). Used by the ATE contrast.
Eigen::MatrixXd eval_at_treatment(const Dataset& ds, const BasisSpec& spec,
                                  double t_fixed);

}  // namespace increff
