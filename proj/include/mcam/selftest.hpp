#pragma once

#include <string>
#include <vector>

namespace mcam {

struct SelfTestResult {
  std::string name;
  bool passed = false;
  std::string message;  // failure detail, empty on pass
};

// Runs the built-in analytic example suite: closed-form and hand-derived
// cases for every pipeline stage. Used by `mcam selftest` and the unit tests.
std::vector<SelfTestResult> run_selftest();

}  // namespace mcam
