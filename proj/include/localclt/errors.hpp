#ifndef LOCALCLT_ERRORS_HPP
#define LOCALCLT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace localclt {

// Bad user input: malformed files, out-of-range parameters, missing keys.
// The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numeric or feasibility failure: infeasible moment sequences, exhausted
// retries, exceeded evaluation budgets, degenerate variances.
// The CLI maps this to exit code 3.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace localclt

#endif
