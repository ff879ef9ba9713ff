#ifndef CVQKD_SELFCHECK_HPP
#define CVQKD_SELFCHECK_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace cvqkd::check {

struct CheckResult {
    std::string name;
    bool passed = false;
    double margin = 0.0;  // distance to the failure boundary; negative when failed
    double lhs = 0.0;
    double rhs = 0.0;
    std::string detail;
};

struct SuiteConfig {
    std::uint64_t seed = 7;
    int n_max = 40;
    int operator_samples = 50;   // random configurations for the operator inequality
    int state_samples = 40;      // random density operators for the witness inequality
    std::uint64_t sim_rounds = 200000;
    double b_scale = 1.0;        // fault-injection hook: scales B in the operator check
};

/// Runs the named invariant checks (operator inequality, witness inequality,
/// POVM completeness, moment identities, joint-state traces, deviation-term
/// inversion, simulator-versus-analytic statistics, security level).
std::vector<CheckResult> run_suite(const SuiteConfig& cfg);

}  // namespace cvqkd::check

#endif  // CVQKD_SELFCHECK_HPP
