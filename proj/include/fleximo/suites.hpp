#pragma once

#include <string>
#include <vector>

namespace fleximo {

struct CheckResult {
    std::string name;
    bool pass = false;
    double value = 0.0; // measured quantity (usually a max error)
    double limit = 0.0; // threshold it was compared against
    std::string detail;
};

struct SuiteResult {
    std::string suite;
    std::vector<CheckResult> checks;
    bool pass() const;
    const CheckResult* first_failure() const;
};

// Available invariant suites: pinv, recovery, equivariance, tokens.
std::vector<std::string> suite_names();

// Runs one suite by name; throws ConfigError for an unknown name.
SuiteResult run_suite(const std::string& name);

} // namespace fleximo
