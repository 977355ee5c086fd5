#pragma once

#include <string>
#include <vector>

namespace timebin {

struct CheckResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;  // largest deviation seen by the check
  std::string detail;
};

// Model diagnostics behind the validate subcommand. The outcome table is
// compared against an independent path enumeration written directly from the
// interferometer geometry, plus normalization, forbidden-slot, marginal and
// closed-form checks over parameter grids.
std::vector<CheckResult> run_selfchecks();

}  // namespace timebin
