#pragma once

#include <optional>
#include <vector>

#include "winscrt/variance.hpp"

namespace winscrt {

// Jackknife pseudo-values tau_i = M*tau_hat - (M-1)*tau_hat_(-i).
struct PseudoValues {
  Estimand estimand = Estimand::WD;
  double tau_hat = 0.0;
  std::vector<double> values;
  int m() const { return static_cast<int>(values.size()); }
};

PseudoValues pseudo_values(Estimand estimand, double tau_hat,
                           const std::vector<std::optional<double>>& leave_one_out);

struct LambdaSolve {
  double lambda = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

// Root of sum z_i / (1 + lambda z_i) = 0 on the interval where all
// denominators stay positive. Throws Infeasible when all z share one sign.
LambdaSolve solve_lambda(const std::vector<double>& z);

struct JelResult {
  double tau0 = 0.0;
  double lambda = 0.0;
  double r_stat = 0.0;  // likelihood ratio statistic, >= 0
  double p_value = 1.0;
  bool feasible = true;
};

// Wilks-type test of tau == tau0 against a chi-square(1) reference.
// An infeasible constraint reports r_stat = +inf, p = 0, feasible = false.
JelResult jel_test(const PseudoValues& pv, double tau0);

struct JelInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_at_hull = false;
  bool hi_at_hull = false;
  bool degenerate = false;  // all pseudo-values equal
};

// Test inversion: { tau : R(tau) <= chisq1(1-alpha) }, endpoints located by
// bisection inside the pseudo-value convex hull.
JelInterval jel_ci(const PseudoValues& pv, double alpha);

}  // namespace winscrt
