#pragma once

#include <string>
#include <vector>

namespace affect::num {

struct GradCheckCase {
  std::string name;
  double max_rel_err = 0.0;
  std::string worst_param;
  bool pass = false;
};

// Central-difference checks for every differentiable op plus both full
// networks at tiny sizes, repeated across seeds. Used by the gradcheck
// CLI subcommand and the test suites.
std::vector<GradCheckCase> run_gradcheck_suite(int seeds = 5,
                                               double tol = 1e-4);

}  // namespace affect::num
