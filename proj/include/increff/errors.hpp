#pragma once

#include <stdexcept>
#include <string>

namespace increff {

// Base class for all library errors. The CLI maps each category to a
// distinct exit code (config=2, data=3, numeric=4).
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input files, schema mismatches, invariant violations.
class DataError : public Error {
public:
    explicit DataError(const std::string& msg) : Error(msg) {}
};

// Invalid user-supplied configuration (CLI flags, config files, DGP params).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Numerical failures: rank deficiency, degenerate projections, too few rows.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

// A requested oracle quantity is not available for the scenario.
class OracleError : public Error {
public:
    explicit OracleError(const std::string& msg) : Error(msg) {}
};

}  // namespace increff
