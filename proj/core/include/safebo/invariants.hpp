#ifndef SAFEBO_INVARIANTS_HPP
#define SAFEBO_INVARIANTS_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace safebo {

/// Outcome of one randomized property suite.
struct SuiteReport {
  std::string suite;
  long trials = 0;       // randomized instances exercised
  long checks = 0;       // individual assertions evaluated
  long violations = 0;
  double max_error = 0.0;  // worst observed slack (suite-specific scale)
  bool pass = false;
  std::string detail;
};

/// Names understood by run_suite.
std::vector<std::string> suite_names();

/// Runs one property suite with `trials` randomized instances (a suite
/// default is used when trials <= 0). Throws std::invalid_argument for an
/// unknown suite name.
SuiteReport run_suite(const std::string& name, long trials, std::uint64_t seed);

}  // namespace safebo

#endif  // SAFEBO_INVARIANTS_HPP
