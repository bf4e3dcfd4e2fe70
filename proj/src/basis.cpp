#include "increff/basis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "increff/errors.hpp"

namespace increff {

namespace {

double ipow(double base, int e) {
    double r = 1.0;
    for (int j = 0; j < e; ++j) r *= base;
    return r;
}

}  // namespace

double BasisTerm::eval(double t, const Eigen::RowVectorXd& x) const {
    switch (kind) {
        case Kind::Intercept:
            return 1.0;
        case Kind::TreatPower:
            return ipow(t, exponent);
        case Kind::CovPower:
            return ipow(x[cov_index], exponent);
        case Kind::TreatCovInteraction:
            return t * x[cov_index];
        case Kind::Custom:
            return custom_eval(t, x);
    }
    return 0.0;
}

double BasisTerm::deriv(double t, const Eigen::RowVectorXd& x) const {
    switch (kind) {
        case Kind::Intercept:
            return 0.0;
        case Kind::TreatPower:
            return exponent * ipow(t, exponent - 1);
        case Kind::CovPower:
            return 0.0;
        case Kind::TreatCovInteraction:
            return x[cov_index];
        case Kind::Custom:
            return custom_deriv(t, x);
    }
    return 0.0;
}

BasisTerm BasisTerm::intercept() {
    BasisTerm b;
    b.kind = Kind::Intercept;
    b.label = "1";
    return b;
}

BasisTerm BasisTerm::treat_power(int exponent) {
    if (exponent < 1) throw ConfigError("TreatPower exponent must be >= 1");
    BasisTerm b;
    b.kind = Kind::TreatPower;
    b.exponent = exponent;
    b.label = exponent == 1 ? "t" : "t^" + std::to_string(exponent);
    return b;
}

BasisTerm BasisTerm::cov_power(int cov_index, int exponent) {
    if (exponent < 1) throw ConfigError("CovPower exponent must be >= 1");
    if (cov_index < 0) throw ConfigError("covariate index must be >= 0");
    BasisTerm b;
    b.kind = Kind::CovPower;
    b.cov_index = cov_index;
    b.exponent = exponent;
    b.label = "x" + std::to_string(cov_index + 1) +
              (exponent == 1 ? "" : "^" + std::to_string(exponent));
    return b;
}

BasisTerm BasisTerm::interaction(int cov_index) {
    if (cov_index < 0) throw ConfigError("covariate index must be >= 0");
    BasisTerm b;
    b.kind = Kind::TreatCovInteraction;
    b.cov_index = cov_index;
    b.label = "t*x" + std::to_string(cov_index + 1);
    return b;
}

BasisTerm BasisTerm::custom(std::string label, Eval eval, Eval deriv) {
    if (!eval || !deriv)
        throw ConfigError("custom terms require both evaluator and derivative");
    BasisTerm b;
    b.kind = Kind::Custom;
    b.label = std::move(label);
    b.custom_eval = std::move(eval);
    b.custom_deriv = std::move(deriv);
    return b;
}

void BasisSpec::check() const {
    if (terms.empty()) throw ConfigError("basis has no terms");
    std::size_t first = 0;
    if (include_intercept) {
        if (terms[0].kind != BasisTerm::Kind::Intercept)
            throw ConfigError("include_intercept set but term 0 is not the intercept");
        first = 1;
    }
    if (first >= terms.size() ||
        terms[first].kind != BasisTerm::Kind::TreatPower ||
        terms[first].exponent != 1)
        throw ConfigError(
            "the first non-intercept basis term must be the raw treatment t");
    for (std::size_t i = 0; i < terms.size(); ++i)
        for (std::size_t j = i + 1; j < terms.size(); ++j)
            if (terms[i] == terms[j])
                throw ConfigError("duplicate basis term: " + terms[i].label);
}

std::string BasisSpec::to_string() const {
    std::string out;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (i) out += " + ";
        out += terms[i].label;
    }
    return out;
}

BasisSpec BasisSpec::parse(const std::string& text) {
    BasisSpec spec;
    spec.include_intercept = false;
    std::vector<BasisTerm> rest;
    std::stringstream ss(text);
    std::string raw;
    while (std::getline(ss, raw, '+')) {
        std::string term;
        for (char c : raw)
            if (!std::isspace(static_cast<unsigned char>(c))) term += c;
        if (term.empty()) throw ConfigError("empty term in basis: \"" + text + "\"");

        if (term == "1") {
            spec.include_intercept = true;
            continue;
        }

        auto parse_exp = [&](const std::string& s) -> std::pair<std::string, int> {
            const auto caret = s.find('^');
            if (caret == std::string::npos) return {s, 1};
            int e = 0;
            try {
                e = std::stoi(s.substr(caret + 1));
            } catch (const std::exception&) {
                throw ConfigError("bad exponent in basis term \"" + s + "\"");
            }
            return {s.substr(0, caret), e};
        };
        auto parse_cov = [&](const std::string& s) -> int {
            if (s.size() < 2 || s[0] != 'x')
                throw ConfigError("cannot parse basis term \"" + term + "\"");
            try {
                const int m = std::stoi(s.substr(1));
                if (m < 1) throw ConfigError("covariate index must be >= 1");
                return m - 1;
            } catch (const ConfigError&) {
                throw;
            } catch (const std::exception&) {
                throw ConfigError("cannot parse covariate \"" + s + "\"");
            }
        };

        const auto star = term.find('*');
        if (star != std::string::npos) {
            const std::string lhs = term.substr(0, star);
            const std::string rhs = term.substr(star + 1);
            if (lhs != "t")
                throw ConfigError("interactions must have the form t*x<m>: \"" +
                                  term + "\"");
            rest.push_back(BasisTerm::interaction(parse_cov(rhs)));
        } else if (term[0] == 't') {
            auto [base, e] = parse_exp(term);
            if (base != "t")
                throw ConfigError("cannot parse basis term \"" + term + "\"");
            rest.push_back(BasisTerm::treat_power(e));
        } else {
            auto [base, e] = parse_exp(term);
            rest.push_back(BasisTerm::cov_power(parse_cov(base), e));
        }
    }
    if (spec.include_intercept) spec.terms.push_back(BasisTerm::intercept());
    spec.terms.insert(spec.terms.end(), rest.begin(), rest.end());
    spec.check();
    return spec;
}

BasisSpec BasisSpec::cubic(int n_covariates) {
    BasisSpec spec;
    spec.include_intercept = true;
    spec.terms.push_back(BasisTerm::intercept());
    spec.terms.push_back(BasisTerm::treat_power(1));
    spec.terms.push_back(BasisTerm::treat_power(2));
    spec.terms.push_back(BasisTerm::treat_power(3));
    for (int m = 0; m < n_covariates; ++m) {
        spec.terms.push_back(BasisTerm::cov_power(m, 1));
        spec.terms.push_back(BasisTerm::cov_power(m, 2));
    }
    spec.check();
    return spec;
}

ExpandedDesign expand(const Dataset& ds, const BasisSpec& spec) {
    spec.check();
    for (const auto& term : spec.terms)
        if (term.cov_index >= static_cast<int>(ds.d()))
            throw ConfigError("CovariateIndexOutOfRange: term " + term.label +
                              " needs covariate " +
                              std::to_string(term.cov_index + 1) +
                              " but dataset has d = " + std::to_string(ds.d()));

    const Eigen::Index n = ds.n();
    const Eigen::Index p = spec.p();
    ExpandedDesign ed;
    ed.spec = spec;
    ed.design.resize(n, p);
    ed.deriv.resize(n, p);

#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::RowVectorXd xi = ds.x.row(i);
        const double ti = ds.t[i];
        for (Eigen::Index k = 0; k < p; ++k) {
            ed.design(i, k) = spec.terms[k].eval(ti, xi);
            ed.deriv(i, k) = spec.terms[k].deriv(ti, xi);
        }
    }
    return ed;
}

Eigen::VectorXd mean_derivatives(const ExpandedDesign& ed) {
    return ed.deriv.colwise().mean();
}

Eigen::MatrixXd eval_at_treatment(const Dataset& ds, const BasisSpec& spec,
                                  double t_fixed) {
    const Eigen::Index n = ds.n();
    const Eigen::Index p = spec.p();
    Eigen::MatrixXd out(n, p);
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::RowVectorXd xi = ds.x.row(i);
        for (Eigen::Index k = 0; k < p; ++k)
            out(i, k) = spec.terms[k].eval(t_fixed, xi);
    }
    return out;
}

}  // namespace increff
