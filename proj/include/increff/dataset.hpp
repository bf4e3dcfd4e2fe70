#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace increff {

// Which columns of a CSV file hold the outcome, the treatment and the
// covariates. Covariate order here fixes the column order of Dataset::x.
struct ColumnSchema {
    std::string outcome_name = "y";
    std::string treatment_name = "t";
    std::vector<std::string> covariate_names;
};

// One observational sample. Immutable by convention after construction;
// safe to share read-only across threads. The optional `h` column is the
// oracle confounder of simulated data and is never fed to estimators.
struct Dataset {
    Eigen::VectorXd y;
    Eigen::VectorXd t;
    Eigen::MatrixXd x;                       // n x d, d >= 0
    std::optional<Eigen::VectorXd> h;        // simulation-only
    std::vector<std::string> covariate_names;

    Eigen::Index n() const { return y.size(); }
    Eigen::Index d() const { return x.cols(); }
};

// Throws DataError naming the first failing invariant:
// equal column lengths, n >= 1, all entries finite, unique column names.
void validate(const Dataset& ds);

// Parses a UTF-8 CSV file (header row, comma separated, period decimal
// separator). Rows keep file order. Throws DataError on a missing column,
// a non-numeric cell (reported with 1-based data row and column name) or
// an empty file.
Dataset load_csv(const std::string& path, const ColumnSchema& schema);

// Writes y, t, covariates (and h when present, under the name "h") with
// round-trip-exact formatting.
void write_csv(const std::string& path, const Dataset& ds,
               const ColumnSchema& schema);

}  // namespace increff
