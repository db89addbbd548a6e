#include "winscrt/randomization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "winscrt/errors.hpp"
#include "winscrt/rng.hpp"

namespace winscrt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// centered replicate statistics; NaN marks an undefined ratio statistic
std::array<double, 4> replicate_stats(const Tallies& t) {
  WinEstimates e = estimate_all(t);
  std::array<double, 4> s;
  s[0] = e.wd;
  s[1] = e.log_wr ? *e.log_wr : std::numeric_limits<double>::quiet_NaN();
  s[2] = e.log_wo ? *e.log_wo : std::numeric_limits<double>::quiet_NaN();
  s[3] = e.door - 0.5;
  return s;
}

double magnitude(double x) { return std::isnan(x) ? kInf : std::abs(x); }
double signed_high(double x) { return std::isnan(x) ? kInf : x; }
double signed_low(double x) { return std::isnan(x) ? -kInf : x; }

}  // namespace

std::int64_t allocation_count(int m, int m1, std::int64_t cap) {
  double c = 1.0;
  const int k = std::min(m1, m - m1);
  for (int i = 1; i <= k; ++i) {
    c *= static_cast<double>(m - k + i) / static_cast<double>(i);
    if (c > 2.0 * static_cast<double>(cap)) break;
  }
  auto count = static_cast<std::int64_t>(std::llround(c));
  if (count > cap)
    throw_infeasible("CapExceeded", "C(" + std::to_string(m) + "," + std::to_string(m1) +
                                        ") = " + std::to_string(count) +
                                        " exceeds the enumeration cap " + std::to_string(cap));
  return count;
}

double permutation_p_value(double observed, const std::vector<double>& reps, Alternative alt,
                           bool full_enumeration) {
  std::int64_t extreme = 0;
  switch (alt) {
    case Alternative::TwoSided: {
      const double o = magnitude(observed);
      for (double r : reps)
        if (magnitude(r) >= o) ++extreme;
      break;
    }
    case Alternative::Greater: {
      const double o = signed_high(observed);
      for (double r : reps)
        if (signed_high(r) >= o) ++extreme;
      break;
    }
    case Alternative::Less: {
      const double o = signed_low(observed);
      for (double r : reps)
        if (signed_low(r) <= o) ++extreme;
      break;
    }
  }
  if (full_enumeration) return static_cast<double>(extreme) / static_cast<double>(reps.size());
  return static_cast<double>(1 + extreme) / static_cast<double>(reps.size() + 1);
}

std::array<PermutationResult, 4> permutation_test_all(const CrossClusterWins& cache,
                                                      const PermutationPlan& plan,
                                                      Alternative alt, bool keep_replicates) {
  const int m = cache.m();
  int m1 = 0;
  for (int a : cache.arm()) m1 += a;

  const auto observed = replicate_stats(cache.tally_observed());

  std::array<std::vector<double>, 4> reps;
  bool full = plan.mode == PermutationPlan::Mode::FullEnumeration;
  std::vector<int> arm(static_cast<std::size_t>(m), 0);

  if (full) {
    const std::int64_t total = allocation_count(m, m1, plan.enumeration_cap);
    for (auto& r : reps) r.reserve(static_cast<std::size_t>(total));
    // lexicographic combinations of treated cluster indices
    std::vector<int> comb(static_cast<std::size_t>(m1));
    for (int i = 0; i < m1; ++i) comb[static_cast<std::size_t>(i)] = i;
    for (;;) {
      std::fill(arm.begin(), arm.end(), 0);
      for (int idx : comb) arm[static_cast<std::size_t>(idx)] = 1;
      const auto s = replicate_stats(cache.tally_for(arm));
      for (int e = 0; e < 4; ++e) reps[static_cast<std::size_t>(e)].push_back(s[static_cast<std::size_t>(e)]);
      // advance
      int i = m1 - 1;
      while (i >= 0 && comb[static_cast<std::size_t>(i)] == m - m1 + i) --i;
      if (i < 0) break;
      ++comb[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < m1; ++j)
        comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
    }
  } else {
    for (auto& r : reps) r.reserve(static_cast<std::size_t>(plan.b));
    std::vector<int> base(static_cast<std::size_t>(m), 0);
    for (int i = 0; i < m1; ++i) base[static_cast<std::size_t>(i)] = 1;
    for (std::int64_t b = 0; b < plan.b; ++b) {
      Rng rng(derive_seed(plan.seed, static_cast<std::uint64_t>(b)));
      arm = base;
      rng.shuffle(arm);
      const auto s = replicate_stats(cache.tally_for(arm));
      for (int e = 0; e < 4; ++e) reps[static_cast<std::size_t>(e)].push_back(s[static_cast<std::size_t>(e)]);
    }
  }

  std::array<PermutationResult, 4> out;
  const std::array<Estimand, 4> ids = {Estimand::WD, Estimand::WR, Estimand::WO, Estimand::DOOR};
  for (int e = 0; e < 4; ++e) {
    auto& r = out[static_cast<std::size_t>(e)];
    r.estimand = ids[static_cast<std::size_t>(e)];
    r.observed = observed[static_cast<std::size_t>(e)];
    r.full_enumeration = full;
    r.replicates = static_cast<std::int64_t>(reps[static_cast<std::size_t>(e)].size());
    r.undefined_replicates = static_cast<std::int64_t>(
        std::count_if(reps[static_cast<std::size_t>(e)].begin(), reps[static_cast<std::size_t>(e)].end(),
                      [](double x) { return std::isnan(x); }));
    r.p_value = permutation_p_value(r.observed, reps[static_cast<std::size_t>(e)], alt, full);
    if (keep_replicates) r.replicate_stats = std::move(reps[static_cast<std::size_t>(e)]);
  }
  return out;
}

PermutationResult permutation_test(const Dataset& d, const ComparisonRule& rule, Estimand estimand,
                                   const PermutationPlan& plan, Alternative alt,
                                   bool keep_replicates) {
  auto cache = CrossClusterWins::build(d, rule);
  auto all = permutation_test_all(cache, plan, alt, keep_replicates);
  switch (estimand) {
    case Estimand::WD: return std::move(all[0]);
    case Estimand::WR: return std::move(all[1]);
    case Estimand::WO: return std::move(all[2]);
    case Estimand::DOOR: return std::move(all[3]);
  }
  throw_invalid("BadEstimand", "unreachable");
}

TestResult fs_score_test(const ClusterScores& cs, const WinEstimates& est, Estimand estimand,
                         const Reference& ref, double alpha, Alternative alt) {
  const double m = static_cast<double>(cs.m());
  const double q = cs.q();

  double numerator = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < cs.score.size(); ++i) {
    mean += static_cast<double>(cs.score[i]);
    if (cs.arm[i] == 1) numerator += static_cast<double>(cs.score[i]);
  }
  mean /= m;
  double ss = 0.0;
  for (auto s : cs.score) {
    const double d = static_cast<double>(s) - mean;
    ss += d * d;
  }
  const double var = q * (1.0 - q) * m / (m - 1.0) * ss;

  TestResult r;
  r.estimand = estimand;
  r.method = "fs";
  r.reference = ref;
  auto point = est.value(estimand);
  if (!point) throw_infeasible("UndefinedEstimate", estimand_name(estimand) + " is undefined");
  r.estimate = *point;
  r.null_value = estimand_log_scale(estimand) ? 1.0 : default_null(estimand);

  if (var <= 0.0) {
    r.statistic = 0.0;
    r.p_value = 1.0;
    r.warnings.push_back("DegenerateScores: all cluster scores equal");
    return r;
  }
  r.statistic = numerator / std::sqrt(var);
  r.p_value = reference_p_value(r.statistic, ref, alt);

  // randomization SE mapped to the estimand's inference scale via the
  // same delta factors as the Wald transforms
  const double se_wd = std::sqrt(var) / (static_cast<double>(cs.n1) * static_cast<double>(cs.n0));
  const Gradients g = gradients(est);
  switch (estimand) {
    case Estimand::WD: r.se = se_wd; break;
    case Estimand::DOOR: r.se = se_wd / 2.0; break;
    case Estimand::WR:
      if (g.log_wr) r.se = se_wd * g.log_wr->d_wd;
      break;
    case Estimand::WO:
      if (g.log_wo) r.se = se_wd * g.log_wo->d_wd;
      break;
  }
  if (r.se) {
    const double qn = reference_quantile(ref, alpha);
    const double tau = *est.inference_value(estimand);
    double lo = tau - qn * *r.se;
    double hi = tau + qn * *r.se;
    if (estimand_log_scale(estimand)) {
      lo = std::exp(lo);
      hi = std::exp(hi);
    } else if (estimand == Estimand::DOOR) {
      lo = std::max(0.0, lo);
      hi = std::min(1.0, hi);
    }
    r.ci = std::make_pair(lo, hi);
  }
  if (estimand != Estimand::WD)
    r.warnings.push_back("fs p-value is shared across estimands (score statistic is estimand-invariant)");
  return r;
}

}  // namespace winscrt
