// Seeded micro-models for checking every differentiable component against
// central differences.
#ifndef JEESDP_GRADCHECK_SUITE_HPP_
#define JEESDP_GRADCHECK_SUITE_HPP_

#include <string>
#include <vector>

namespace jeesdp {

struct GradcheckRow {
  std::string component;
  std::string group;  // trigger, argument, or loss
  double max_error = 0.0;
  bool passed = false;
};

struct GradcheckOptions {
  std::string module = "all";  // all | trigger | argument | loss
  double eps = 1e-6;
  double tolerance = 1e-5;
  bool inject_fault = false;  // flips every analytic gradient
};

std::vector<GradcheckRow> run_gradcheck_suite(const GradcheckOptions& options = {});
std::string gradcheck_table(const std::vector<GradcheckRow>& rows);

}  // namespace jeesdp

#endif  // JEESDP_GRADCHECK_SUITE_HPP_
