#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "winscrt/outcomes.hpp"
#include "winscrt/estimators.hpp"
#include "winscrt/stats.hpp"

namespace winscrt {

// One analysis request; mirrors the CLI `analyze` surface.
struct AnalyzeConfig {
  std::string method = "wald_score";  // wald_score | wald_u | wald_jk | perm | fs | jel
  Estimand estimand = Estimand::WD;
  std::optional<double> null_value;  // original scale; defaults per estimand
  Alternative alternative = Alternative::TwoSided;
  double alpha = 0.05;
  bool use_t = true;  // t(M-2) reference for wald_* and fs
  std::int64_t b = 2000;
  std::uint64_t seed = 0;
  RuleVariant rule = RuleVariant::BothEvents;
  bool exact = false;  // permutation: enumerate all allocations
  std::int64_t enumeration_cap = 200000;
  bool wr_bivariate = false;  // wald_score: bivariate log(WR) variance
};

// JSON text of the analysis report (schema documented in the README)
std::string analyze_json(const Dataset& d, const AnalyzeConfig& cfg);

}  // namespace winscrt
