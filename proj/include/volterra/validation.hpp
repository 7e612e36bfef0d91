#pragma once

#include <string>
#include <vector>

namespace volterra {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// The always-on invariant suite behind the `validate` subcommand: adjoint
/// identity, penalty quadratic-form identity, impact-function checks, Nystrom
/// refinement rates, solver cross-validation, LSMC exactness, basis counting,
/// and the monotonicity sampler.
std::vector<CheckResult> run_validation_suite(int threads = 1);

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace volterra
