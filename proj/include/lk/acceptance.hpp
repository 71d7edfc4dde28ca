#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lk/liegroup.hpp"

namespace lk {

struct AcceptanceConfig {
  std::string group = "su2";
  int N = 400;
  std::uint64_t seed = 0;
  std::map<std::string, double> tol;  // overrides of default_tolerances()
};

/// Keys accepted by --tol, with their defaults.
const std::map<std::string, double>& default_tolerances();

/// Throws SpecMismatch for unknown keys or non-positive values.
void check_tolerance_overrides(const std::map<std::string, double>& overrides);

struct Measurement {
  std::string key;
  double value = 0.0;
  double bound = 0.0;
  bool upper = true;  // value <= bound, else value >= bound
  bool passed() const { return upper ? value <= bound : value >= bound; }
};

struct ConvergenceRow {
  int N = 0;
  double error = 0.0;
  double order = 0.0;  // against the previous row; 0 on the first
};

struct CriterionResult {
  int id = 0;
  std::string name;
  std::vector<Measurement> measurements;
  std::vector<ConvergenceRow> convergence;  // criterion 3 only
  std::string error;                        // set when the check threw

  bool passed() const;
};

/// Criteria 1..12; each draws from its own generator seeded by (seed, id), so
/// results do not depend on which criteria run.
CriterionResult run_criterion(int id, const AcceptanceConfig& cfg);
std::vector<CriterionResult> run_acceptance(const AcceptanceConfig& cfg);

constexpr int kCriterionCount = 12;

}  // namespace lk
