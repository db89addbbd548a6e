#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "winscrt/variance.hpp"

namespace winscrt {

struct PermutationPlan {
  enum class Mode { FullEnumeration, MonteCarlo };
  Mode mode = Mode::MonteCarlo;
  std::int64_t b = 2000;           // Monte Carlo replicates
  std::uint64_t seed = 0;
  std::int64_t enumeration_cap = 200000;
};

struct PermutationResult {
  Estimand estimand = Estimand::WD;
  double observed = 0.0;  // centered statistic on the inference scale
  double p_value = 1.0;
  std::int64_t replicates = 0;
  std::int64_t undefined_replicates = 0;
  bool full_enumeration = false;
  std::vector<double> replicate_stats;  // filled when keep_replicates
};

// number of allocations C(m, m1); throws CapExceeded above the plan cap
std::int64_t allocation_count(int m, int m1, std::int64_t cap);

// p-value from replicate statistics; an undefined statistic is carried as
// NaN and counts as extreme. Monte Carlo uses (1 + #extreme)/(B + 1); full
// enumeration counts the identity allocation in the numerator.
double permutation_p_value(double observed, const std::vector<double>& replicate_stats,
                           Alternative alt, bool full_enumeration);

// Recomputes the transformed statistics over treatment-label allocations
// with exactly m1 treated clusters, reusing the cached pair scores.
std::array<PermutationResult, 4> permutation_test_all(const CrossClusterWins& cache,
                                                      const PermutationPlan& plan,
                                                      Alternative alt,
                                                      bool keep_replicates = false);

PermutationResult permutation_test(const Dataset& d, const ComparisonRule& rule,
                                   Estimand estimand, const PermutationPlan& plan,
                                   Alternative alt = Alternative::TwoSided,
                                   bool keep_replicates = false);

// Finkelstein-Schoenfeld style score test: the assignment-weighted cluster
// score contrast studentized by its finite-population randomization variance.
// The statistic depends on the scores alone, so the p-value is shared across
// estimands; the result carries the requested estimand's point estimate.
TestResult fs_score_test(const ClusterScores& cs, const WinEstimates& est, Estimand estimand,
                         const Reference& ref, double alpha, Alternative alt);

}  // namespace winscrt
