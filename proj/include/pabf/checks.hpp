#pragma once

#include <string>
#include <vector>

// Built-in numerical correctness suite behind the `check` subcommand:
// discrete-operator identities, force-vs-finite-difference comparisons,
// projection fixtures, unbiased Boltzmann sampling moments and estimator
// accounting.

namespace pabf {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// quick mode shrinks the sampling budgets (fewer random configurations,
// shorter Boltzmann run) without dropping any check.
std::vector<CheckResult> run_checks(bool quick);

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace pabf
