#include "winscrt/jel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "winscrt/errors.hpp"

namespace winscrt {

PseudoValues pseudo_values(Estimand estimand, double tau_hat,
                           const std::vector<std::optional<double>>& leave_one_out) {
  PseudoValues pv;
  pv.estimand = estimand;
  pv.tau_hat = tau_hat;
  const double m = static_cast<double>(leave_one_out.size());
  pv.values.reserve(leave_one_out.size());
  for (const auto& loo : leave_one_out) {
    if (!loo || !std::isfinite(*loo))
      throw_infeasible("UndefinedLeaveOneOut",
                       estimand_name(estimand) + " is undefined after some cluster deletion");
    pv.values.push_back(m * tau_hat - (m - 1.0) * *loo);
  }
  return pv;
}

namespace {

double lagrange_g(const std::vector<double>& z, double lambda) {
  double g = 0.0;
  for (double zi : z) g += zi / (1.0 + lambda * zi);
  return g;
}

}  // namespace

LambdaSolve solve_lambda(const std::vector<double>& z) {
  double sum = 0.0, zmin = 0.0, zmax = 0.0;
  for (double zi : z) {
    sum += zi;
    zmin = std::min(zmin, zi);
    zmax = std::max(zmax, zi);
  }
  if (zmin == 0.0 && zmax == 0.0) return {0.0, 0.0, 0};
  if (sum == 0.0) return {0.0, 0.0, 0};  // g(0) = 0 exactly
  if (!(zmin < 0.0) || !(zmax > 0.0))
    throw_infeasible("Infeasible", "pseudo-value deviations are all of one sign");

  // g is strictly decreasing on the open interval (-1/zmax, -1/zmin) with
  // g(0) = sum, so the root lies strictly between 0 and the singular end on
  // the side of sum's sign. Bisection only ever evaluates interior points.
  double a, b;  // invariant: root in (a, b)
  if (sum > 0.0) {
    a = 0.0;
    b = -1.0 / zmin;
  } else {
    a = -1.0 / zmax;
    b = 0.0;
  }

  LambdaSolve out;
  double lambda = 0.5 * (a + b);
  for (int it = 0; it < 300; ++it) {
    lambda = 0.5 * (a + b);
    const double g = lagrange_g(z, lambda);
    ++out.iterations;
    if (std::abs(g) < 1e-13 || b - a < 1e-16 * (std::abs(a) + std::abs(b)) + 1e-300) {
      out.lambda = lambda;
      out.residual = g;
      return out;
    }
    if (g > 0.0)
      a = lambda;
    else
      b = lambda;
  }
  out.lambda = lambda;
  out.residual = lagrange_g(z, lambda);
  return out;
}

namespace {

JelResult jel_test_at(const std::vector<double>& pseudo, double tau0) {
  JelResult r;
  r.tau0 = tau0;
  std::vector<double> z(pseudo.size());
  bool any_pos = false, any_neg = false, all_zero = true;
  for (std::size_t i = 0; i < pseudo.size(); ++i) {
    z[i] = pseudo[i] - tau0;
    if (z[i] > 0.0) any_pos = true;
    if (z[i] < 0.0) any_neg = true;
    if (z[i] != 0.0) all_zero = false;
  }
  if (all_zero) {
    r.lambda = 0.0;
    r.r_stat = 0.0;
    r.p_value = 1.0;
    return r;
  }
  if (!any_pos || !any_neg) {
    // one-sided hull violation: maximal evidence against tau0
    r.feasible = false;
    r.lambda = std::numeric_limits<double>::quiet_NaN();
    r.r_stat = std::numeric_limits<double>::infinity();
    r.p_value = 0.0;
    return r;
  }
  const LambdaSolve ls = solve_lambda(z);
  r.lambda = ls.lambda;
  double stat = 0.0;
  for (double zi : z) stat += std::log1p(ls.lambda * zi);
  r.r_stat = std::max(0.0, 2.0 * stat);
  r.p_value = 1.0 - chisq1_cdf(r.r_stat);
  return r;
}

}  // namespace

JelResult jel_test(const PseudoValues& pv, double tau0) { return jel_test_at(pv.values, tau0); }

JelInterval jel_ci(const PseudoValues& pv, double alpha) {
  const double threshold = chisq1_quantile(1.0 - alpha);
  const auto [mn_it, mx_it] = std::minmax_element(pv.values.begin(), pv.values.end());
  const double mn = *mn_it, mx = *mx_it;

  JelInterval ci;
  if (mn == mx) {
    ci.lo = ci.hi = mn;
    ci.degenerate = ci.lo_at_hull = ci.hi_at_hull = true;
    return ci;
  }

  double center = 0.0;
  for (double v : pv.values) center += v;
  center /= static_cast<double>(pv.values.size());

  const double span = mx - mn;
  const double margin = span * 1e-12;
  const double tol = 1e-8;

  auto r_at = [&](double tau) { return jel_test_at(pv.values, tau).r_stat; };

  // upper endpoint on [center, mx)
  {
    double b = mx - margin;
    if (r_at(b) <= threshold) {
      ci.hi = mx;
      ci.hi_at_hull = true;
    } else {
      double a = center;
      while (b - a > tol) {
        const double mid = 0.5 * (a + b);
        if (r_at(mid) <= threshold)
          a = mid;
        else
          b = mid;
      }
      ci.hi = 0.5 * (a + b);
    }
  }
  // lower endpoint on (mn, center]
  {
    double a = mn + margin;
    if (r_at(a) <= threshold) {
      ci.lo = mn;
      ci.lo_at_hull = true;
    } else {
      double b = center;
      while (b - a > tol) {
        const double mid = 0.5 * (a + b);
        if (r_at(mid) <= threshold)
          b = mid;
        else
          a = mid;
      }
      ci.lo = 0.5 * (a + b);
    }
  }
  return ci;
}

}  // namespace winscrt
