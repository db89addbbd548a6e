#include "winscrt/variance.hpp"

#include <algorithm>
#include <cmath>

#include "winscrt/errors.hpp"

namespace winscrt {

namespace {

// sample variance with denominator n-1
double sample_variance(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return ss / (n - 1.0);
}

}  // namespace

VarianceEstimate cluster_score_variance(const ClusterScores& cs, const WinEstimates& est,
                              const ClusterScoreOptions& opts) {
  if (cs.m1 < 2 || cs.m0 < 2)
    throw_infeasible("TooFewClustersPerArm", "arm score variances need at least 2 clusters per arm");

  std::vector<double> s1, s0;
  s1.reserve(static_cast<std::size_t>(cs.m1));
  s0.reserve(static_cast<std::size_t>(cs.m0));
  for (std::size_t i = 0; i < cs.score.size(); ++i) {
    if (cs.arm[i] == 1)
      s1.push_back(static_cast<double>(cs.score[i]));
    else
      s0.push_back(static_cast<double>(cs.score[i]));
  }

  VarianceEstimate v;
  v.method = VarianceMethod::ClusterScore;
  v.sigma1_sq = sample_variance(s1);
  v.sigma0_sq = sample_variance(s0);

  const double m = static_cast<double>(cs.m());
  const double q = cs.q();
  const double pairs = static_cast<double>(cs.n1) * static_cast<double>(cs.n0);
  const double scale = m * q * (1.0 - q) / pairs;
  const double base = scale * scale * (v.sigma1_sq / (q * m) + v.sigma0_sq / ((1.0 - q) * m));

  v.wd = base;
  v.door = base / 4.0;
  const Gradients g = gradients(est);
  if (g.log_wo) v.log_wo = g.log_wo->d_wd * g.log_wo->d_wd * base;
  if (g.log_wr) {
    if (opts.bivariate_wr) {
      // full (pi_win, pi_loss) delta using the projection covariance
      VarianceEstimate proj = projected_u_covariance(*opts.bivariate_wr, est);
      v.log_wr = proj.log_wr;
      v.notes.push_back("log(WR) variance from bivariate projection covariance");
    } else {
      v.log_wr = g.log_wr->d_wd * g.log_wr->d_wd * base;
    }
  }
  return v;
}

VarianceEstimate projected_u_covariance(const ProjectionTable& p, const WinEstimates& est) {
  if (p.m1 < 2 || p.m0 < 2)
    throw_infeasible("TooFewClustersPerArm", "arm covariance needs at least 2 clusters per arm");

  VarianceEstimate v;
  v.method = VarianceMethod::ProjectedU;

  // arm-wise sample covariance of the cluster sums G_i, denominator M_a - 1
  for (int a : {0, 1}) {
    double mw = 0.0, ml = 0.0;
    int cnt = 0;
    for (std::size_t i = 0; i < p.g_win.size(); ++i) {
      if (p.arm[i] != a) continue;
      mw += p.g_win[i];
      ml += p.g_loss[i];
      ++cnt;
    }
    mw /= cnt;
    ml /= cnt;
    SymMat2 s;
    for (std::size_t i = 0; i < p.g_win.size(); ++i) {
      if (p.arm[i] != a) continue;
      const double dw = p.g_win[i] - mw;
      const double dl = p.g_loss[i] - ml;
      s.ww += dw * dw;
      s.wl += dw * dl;
      s.ll += dl * dl;
    }
    const double den = cnt - 1.0;
    s.ww /= den;
    s.wl /= den;
    s.ll /= den;
    if (a == 1)
      v.sigma1 = s;
    else
      v.sigma0 = s;
  }

  const double c1 = p.nbar0 * p.nbar0 / p.m1;
  const double c0 = p.nbar1 * p.nbar1 / p.m0;
  v.sigma_u = {c1 * v.sigma1.ww + c0 * v.sigma0.ww, c1 * v.sigma1.wl + c0 * v.sigma0.wl,
               c1 * v.sigma1.ll + c0 * v.sigma0.ll};
  const double d = p.nbar1 * p.nbar0;
  v.sigma_pi = {v.sigma_u.ww / (d * d), v.sigma_u.wl / (d * d), v.sigma_u.ll / (d * d)};

  const Gradients g = gradients(est);
  v.wd = v.sigma_pi.quad(g.wd.d_pi_win, g.wd.d_pi_loss);
  v.door = v.sigma_pi.quad(g.door.d_pi_win, g.door.d_pi_loss);
  if (g.log_wr) v.log_wr = v.sigma_pi.quad(g.log_wr->d_pi_win, g.log_wr->d_pi_loss);
  if (g.log_wo) v.log_wo = v.sigma_pi.quad(g.log_wo->d_pi_win, g.log_wo->d_pi_loss);
  return v;
}

LeaveOneOutEstimates leave_one_out_estimates(const DeletedTallySet& dt) {
  LeaveOneOutEstimates loo;
  loo.m = static_cast<int>(dt.deleted.size());
  for (std::size_t i = 0; i < dt.deleted.size(); ++i) {
    if (dt.degenerate[i])
      throw_infeasible("DegenerateDeletion",
                       "removing cluster " + std::to_string(i) + " empties an arm");
    WinEstimates e = estimate_all(dt.deleted[i]);
    loo.wd.push_back(e.wd);
    loo.door.push_back(e.door);
    loo.log_wr.push_back(e.log_wr);
    loo.log_wo.push_back(e.log_wo);
  }
  return loo;
}

namespace {

std::optional<double> jk_variance_one(const std::vector<std::optional<double>>& loo) {
  const double m = static_cast<double>(loo.size());
  double mean = 0.0;
  for (const auto& v : loo) {
    if (!v || !std::isfinite(*v)) return std::nullopt;
    mean += *v;
  }
  mean /= m;
  double ss = 0.0;
  for (const auto& v : loo) ss += (*v - mean) * (*v - mean);
  return (m - 1.0) / m * ss;
}

}  // namespace

VarianceEstimate jackknife_variance(const LeaveOneOutEstimates& loo) {
  VarianceEstimate v;
  v.method = VarianceMethod::Jackknife;
  v.wd = jk_variance_one(loo.wd);
  v.door = jk_variance_one(loo.door);
  v.log_wr = jk_variance_one(loo.log_wr);
  if (!v.log_wr) v.notes.push_back("UndefinedLeaveOneOut: log(WR)");
  v.log_wo = jk_variance_one(loo.log_wo);
  if (!v.log_wo) v.notes.push_back("UndefinedLeaveOneOut: log(WO)");
  return v;
}

namespace {

std::string variance_method_name(VarianceMethod m) {
  switch (m) {
    case VarianceMethod::ClusterScore: return "wald_score";
    case VarianceMethod::ProjectedU: return "wald_u";
    case VarianceMethod::Jackknife: return "wald_jk";
  }
  return "?";
}

double to_original(Estimand e, double inference_value) {
  if (estimand_log_scale(e)) return std::exp(inference_value);
  return inference_value;
}

}  // namespace

TestResult wald_test(const WinEstimates& est, const VarianceEstimate& var, Estimand estimand,
                     const Reference& ref, double alpha, Alternative alt,
                     std::optional<double> null_original) {
  auto tau = est.inference_value(estimand);
  if (!tau || !std::isfinite(*tau))
    throw_infeasible("UndefinedEstimate",
                     estimand_name(estimand) + " is undefined on this dataset");
  auto s2 = var.get(estimand);
  if (!s2) throw_infeasible("UndefinedVariance",
                            "no variance for " + estimand_name(estimand));
  if (!(*s2 > 0.0)) throw_infeasible("ZeroVariance", "estimated variance is zero");

  double null_inf;
  if (null_original) {
    if (estimand_log_scale(estimand) && !(*null_original > 0.0))
      throw_invalid("BadNull", "null value for a ratio estimand must be positive");
    null_inf = estimand_log_scale(estimand) ? std::log(*null_original) : *null_original;
  } else {
    null_inf = default_null(estimand);
  }

  TestResult r;
  r.estimand = estimand;
  r.method = variance_method_name(var.method);
  r.estimate = *est.value(estimand);
  r.se = std::sqrt(*s2);
  r.statistic = (*tau - null_inf) / *r.se;
  r.reference = ref;
  r.p_value = reference_p_value(r.statistic, ref, alt);
  r.null_value = null_original ? *null_original
                               : (estimand_log_scale(estimand) ? 1.0 : default_null(estimand));
  const double qn = reference_quantile(ref, alpha);
  double lo = to_original(estimand, *tau - qn * *r.se);
  double hi = to_original(estimand, *tau + qn * *r.se);
  if (estimand == Estimand::DOOR) {
    lo = std::max(0.0, lo);
    hi = std::min(1.0, hi);
  }
  r.ci = std::make_pair(lo, hi);
  r.warnings = var.notes;
  return r;
}

}  // namespace winscrt
