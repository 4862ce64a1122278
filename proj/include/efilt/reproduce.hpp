#pragma once

// The acceptance battery: each check recomputes one family of closed-form
// predictions from first principles and reports pass/fail with a short detail
// line. Sampling checks use fixed seeds.

#include <string>
#include <string_view>
#include <vector>

namespace efilt {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
};

CriterionResult check_success_probability();
CriterionResult check_visibility();
CriterionResult check_nonuniform_channels();
CriterionResult check_series();
CriterionResult check_purification();
CriterionResult check_codec_equivalence();
CriterionResult check_collective_encoding();
CriterionResult check_internal_dof();
CriterionResult check_noise_equivalence();
CriterionResult check_coherent_classical();
CriterionResult check_two_party_protocols();
CriterionResult check_thresholds();

/// `subset` is "all" or a comma-separated list of criterion ids or names.
/// Throws ConfigError for an unknown entry.
std::vector<CriterionResult> reproduce(std::string_view subset = "all");

/// (id, name) for every criterion, in order.
std::vector<std::pair<int, std::string>> criterion_names();

}  // namespace efilt
