#pragma once

#include <functional>
#include <string>
#include <vector>

#include "alam/nn/tape.hpp"

namespace alam::selftest {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Central finite differences of a scalar function over a parameter block,
/// step 1e-5. `f` must be deterministic (noise pre-drawn outside).
nn::Mat finite_difference_gradient(const std::function<double()>& f, nn::ParamBlock& block,
                                   double step = 1e-5);

/// max(||a - fd||) relative to the gradient scale, with an absolute floor so
/// exactly-zero gradients (stop-gradient paths) compare cleanly.
double gradient_discrepancy(const nn::Mat& analytic, const nn::Mat& fd);

// the individual suites; each returns one result per check
std::vector<CheckResult> check_forward_reevaluation(std::uint64_t seed);
std::vector<CheckResult> check_gradient_suite(std::uint64_t seed);
std::vector<CheckResult> check_slack_oracle(std::uint64_t seed);
std::vector<CheckResult> check_bellman_chain();

/// Everything above, in order.
std::vector<CheckResult> run_all(std::uint64_t seed = 7);

/// Prints one pass/fail line per check; returns false if anything failed.
bool report(const std::vector<CheckResult>& results);

}  // namespace alam::selftest
