#pragma once

#include <string>
#include <vector>

#include "beurling/step_function.hpp"

namespace beurling {

struct PropertyResult {
  std::string name;
  bool passed;
  std::string detail;
};

struct VerifyReport {
  std::vector<PropertyResult> results;  // stops after the first failure
  bool passed() const;
  // Name of the first violated property, empty when all passed.
  std::string first_failure() const;
  json to_json() const;
};

// Runs the invariant suites of every module in a fixed order.
VerifyReport run_invariant_suite();

}  // namespace beurling
