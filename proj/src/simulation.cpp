#include "winscrt/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <thread>

#include "csv_util.hpp"
#include "winscrt/errors.hpp"
#include "winscrt/jel.hpp"
#include "winscrt/randomization.hpp"
#include "winscrt/variance.hpp"

namespace winscrt {

void Scenario::validate() const {
  if (m < 2) throw_invalid("BadScenario", "need at least 2 clusters");
  const double qm = q * m;
  if (std::abs(qm - std::round(qm)) > 1e-9)
    throw_invalid("BadScenario", "q*M must be an integer");
  const int m1 = static_cast<int>(std::llround(qm));
  if (m1 < 1 || m1 >= m) throw_invalid("BadScenario", "allocation leaves an arm empty");
  if (!(nbar > min_cluster_size)) throw_invalid("BadScenario", "mean cluster size must exceed the minimum");
  if (cv < 0.0) throw_invalid("BadScenario", "cv must be nonnegative");
  if (!(alpha1 > 0.0) || !(alpha2 > 0.0)) throw_invalid("BadScenario", "frailty shapes must be positive");
  if (eta < 1.0) throw_invalid("BadScenario", "Gumbel dependence parameter must be >= 1");
  if (!(kappa1 > 0.0) || !(kappa2 > 0.0) || !(lambda1 > 0.0) || !(lambda2 > 0.0))
    throw_invalid("BadScenario", "Weibull parameters must be positive");
  if (!(tau_c > 0.0)) throw_invalid("BadScenario", "administrative end time must be positive");
}

int Scenario::treated_clusters() const { return static_cast<int>(std::llround(q * m)); }

ClusterSizeDraw draw_cluster_sizes(double nbar, double cv, int m, int min_size, Rng& rng) {
  ClusterSizeDraw out;
  out.sizes.reserve(static_cast<std::size_t>(m));
  if (cv == 0.0) {
    out.sizes.assign(static_cast<std::size_t>(m), static_cast<int>(std::llround(nbar)));
    return out;
  }
  const double variance = cv * nbar * cv * nbar;
  if (variance <= nbar) {
    // below the Poisson floor: no negative-binomial solution
    out.poisson_fallback = true;
    for (int i = 0; i < m; ++i) {
      long n;
      do {
        n = rng.poisson(nbar);
      } while (n < min_size);
      out.sizes.push_back(static_cast<int>(n));
    }
    return out;
  }
  // gamma-Poisson mixture: r = mean^2/(var-mean), scale = (var-mean)/mean
  const double r = nbar * nbar / (variance - nbar);
  const double scale = (variance - nbar) / nbar;
  for (int i = 0; i < m; ++i) {
    long n;
    do {
      n = rng.poisson(rng.gamma(r, scale));
    } while (n < min_size);
    out.sizes.push_back(static_cast<int>(n));
  }
  return out;
}

std::pair<double, double> sample_gumbel_pair(double eta, Rng& rng) {
  if (eta <= 1.0) return {rng.uniform(), rng.uniform()};
  const double alpha = 1.0 / eta;
  // positive stable S with Laplace transform exp(-t^alpha)
  const double u = rng.uniform(0.0, M_PI);
  const double e = rng.exponential(1.0);
  const double s = std::sin(alpha * u) / std::pow(std::sin(u), 1.0 / alpha) *
                   std::pow(std::sin((1.0 - alpha) * u) / e, (1.0 - alpha) / alpha);
  const double e1 = rng.exponential(1.0);
  const double e2 = rng.exponential(1.0);
  return {std::exp(-std::pow(e1 / s, alpha)), std::exp(-std::pow(e2 / s, alpha))};
}

double invert_weibull_ph(double u, double kappa, double lambda, double gamma, double theta, int a) {
  return std::pow(-std::log(u) / (gamma * lambda * std::exp(theta * a)), 1.0 / kappa);
}

namespace {

std::string padded_id(char prefix, int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%c%06d", prefix, index);
  return buf;
}

}  // namespace

Dataset generate_dataset(const Scenario& s, Rng& rng) {
  s.validate();
  const int m1 = s.treated_clusters();

  auto sizes = draw_cluster_sizes(s.nbar, s.cv, s.m, s.min_cluster_size, rng);
  std::vector<int> arm(static_cast<std::size_t>(s.m), 0);
  for (int i = 0; i < m1; ++i) arm[static_cast<std::size_t>(i)] = 1;
  rng.shuffle(arm);

  Dataset d;
  d.components = 2;
  d.clusters.reserve(static_cast<std::size_t>(s.m));
  for (int i = 0; i < s.m; ++i) {
    Cluster c;
    c.id = padded_id('c', i + 1);
    c.arm = arm[static_cast<std::size_t>(i)];
    const double g1 = rng.gamma(s.alpha1, 1.0 / s.alpha1);
    const double g2 = rng.gamma(s.alpha2, 1.0 / s.alpha2);
    const int n = sizes.sizes[static_cast<std::size_t>(i)];
    c.subjects.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      const auto [u1, u2] = sample_gumbel_pair(s.eta, rng);
      const double t1 = invert_weibull_ph(u1, s.kappa1, s.lambda1, g1, s.theta1, c.arm);
      const double t2 = invert_weibull_ph(u2, s.kappa2, s.lambda2, g2, s.theta2, c.arm);
      const double cens_draw = rng.uniform();
      const double cstar = s.xi > 0.0 ? -std::log(cens_draw) / s.xi
                                      : std::numeric_limits<double>::infinity();
      const double cens = std::min(cstar, s.tau_c);
      SubjectOutcome subj;
      subj.id = padded_id('s', j + 1);
      // terminal component
      subj.components.push_back({std::min(t1, cens), t1 <= cens});
      // nonterminal: observed only if it precedes both death and censoring
      subj.components.push_back({std::min({t2, t1, cens}), t2 < std::min(t1, cens)});
      c.subjects.push_back(std::move(subj));
    }
    d.clusters.push_back(std::move(c));
  }
  d.finalize();
  return d;
}

Procedure procedure_from_string(const std::string& s) {
  if (s == "wald_score") return Procedure::WaldScore;
  if (s == "wald_u") return Procedure::WaldU;
  if (s == "wald_jk") return Procedure::WaldJackknife;
  if (s == "perm") return Procedure::Perm;
  if (s == "fs") return Procedure::FS;
  if (s == "jel") return Procedure::JEL;
  throw_invalid("BadProcedure", "unknown procedure '" + s + "'");
}

std::string procedure_name(Procedure p) {
  switch (p) {
    case Procedure::WaldScore: return "wald_score";
    case Procedure::WaldU: return "wald_u";
    case Procedure::WaldJackknife: return "wald_jk";
    case Procedure::Perm: return "perm";
    case Procedure::FS: return "fs";
    case Procedure::JEL: return "jel";
  }
  return "?";
}

const std::array<Procedure, kProcedureCount>& all_procedures() {
  static const std::array<Procedure, kProcedureCount> a = {
      Procedure::WaldScore, Procedure::WaldU, Procedure::WaldJackknife,
      Procedure::Perm,    Procedure::FS,     Procedure::JEL};
  return a;
}

const std::array<Estimand, kEstimandCount>& all_estimands() {
  static const std::array<Estimand, kEstimandCount> a = {Estimand::WD, Estimand::WR, Estimand::WO,
                                                         Estimand::DOOR};
  return a;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct ReplicateOutcome {
  std::array<std::array<double, kEstimandCount>, kProcedureCount> p;
  double pi_tie = 0.0;
};

int estimand_index(Estimand e) {
  switch (e) {
    case Estimand::WD: return 0;
    case Estimand::WR: return 1;
    case Estimand::WO: return 2;
    case Estimand::DOOR: return 3;
  }
  return 0;
}

ReplicateOutcome analyze_replicate(const Dataset& d, const ComparisonRule& rule,
                                   const RunConfig& cfg,
                                   const std::array<bool, kProcedureCount>& wanted,
                                   std::uint64_t rep_root) {
  ReplicateOutcome out;
  for (auto& row : out.p) row.fill(kNaN);

  const auto cache = CrossClusterWins::build(d, rule);
  const Tallies tallies = cache.tally_observed();
  const WinEstimates est = estimate_all(tallies);
  out.pi_tie = est.pi_tie;

  const Reference wald_ref = cfg.wald_use_t ? Reference::t_df(d.m - 2) : Reference::normal();
  const Reference fs_ref = cfg.fs_use_t ? Reference::t_df(d.m - 2) : Reference::normal();

  auto set_wald = [&](Procedure proc, const VarianceEstimate& var) {
    auto& row = out.p[static_cast<std::size_t>(proc)];
    for (Estimand e : all_estimands()) {
      try {
        row[static_cast<std::size_t>(estimand_index(e))] =
            wald_test(est, var, e, wald_ref, cfg.alpha, Alternative::TwoSided).p_value;
      } catch (const Error&) {
        // estimand undefined on this replicate
      }
    }
  };

  ClusterScores cs;
  bool have_cs = false;
  if (wanted[static_cast<std::size_t>(Procedure::WaldScore)] || wanted[static_cast<std::size_t>(Procedure::FS)]) {
    cs = cache.scores();
    have_cs = true;
  }

  if (wanted[static_cast<std::size_t>(Procedure::WaldScore)]) {
    try {
      set_wald(Procedure::WaldScore, cluster_score_variance(cs, est));
    } catch (const Error&) {
    }
  }
  if (wanted[static_cast<std::size_t>(Procedure::WaldU)]) {
    try {
      set_wald(Procedure::WaldU, projected_u_covariance(subject_projections(d, rule), est));
    } catch (const Error&) {
    }
  }

  LeaveOneOutEstimates loo;
  bool have_loo = false;
  if (wanted[static_cast<std::size_t>(Procedure::WaldJackknife)] || wanted[static_cast<std::size_t>(Procedure::JEL)]) {
    try {
      loo = leave_one_out_estimates(cache.leave_one_cluster());
      have_loo = true;
    } catch (const Error&) {
    }
  }
  if (wanted[static_cast<std::size_t>(Procedure::WaldJackknife)] && have_loo) {
    try {
      set_wald(Procedure::WaldJackknife, jackknife_variance(loo));
    } catch (const Error&) {
    }
  }

  if (wanted[static_cast<std::size_t>(Procedure::Perm)]) {
    PermutationPlan plan;
    plan.mode = PermutationPlan::Mode::MonteCarlo;
    plan.b = cfg.b_perm;
    plan.seed = derive_seed(rep_root, 2);
    const auto perm = permutation_test_all(cache, plan, Alternative::TwoSided);
    auto& row = out.p[static_cast<std::size_t>(Procedure::Perm)];
    for (const auto& pr : perm)
      row[static_cast<std::size_t>(estimand_index(pr.estimand))] = pr.p_value;
  }

  if (wanted[static_cast<std::size_t>(Procedure::FS)] && have_cs) {
    auto& row = out.p[static_cast<std::size_t>(Procedure::FS)];
    for (Estimand e : all_estimands()) {
      try {
        row[static_cast<std::size_t>(estimand_index(e))] =
            fs_score_test(cs, est, e, fs_ref, cfg.alpha, Alternative::TwoSided).p_value;
      } catch (const Error&) {
      }
    }
  }

  if (wanted[static_cast<std::size_t>(Procedure::JEL)] && have_loo) {
    auto& row = out.p[static_cast<std::size_t>(Procedure::JEL)];
    for (Estimand e : all_estimands()) {
      try {
        const auto tau = est.inference_value(e);
        if (!tau || !std::isfinite(*tau)) continue;
        const PseudoValues pv = pseudo_values(e, *tau, loo.get(e));
        row[static_cast<std::size_t>(estimand_index(e))] = jel_test(pv, default_null(e)).p_value;
      } catch (const Error&) {
      }
    }
  }
  return out;
}

}  // namespace

ScenarioResult run_scenario(const Scenario& s, const RunConfig& cfg) {
  s.validate();
  const auto t_start = std::chrono::steady_clock::now();

  std::array<bool, kProcedureCount> wanted{};
  if (cfg.procedures.empty()) {
    wanted.fill(true);
  } else {
    for (Procedure p : cfg.procedures) wanted[static_cast<std::size_t>(p)] = true;
  }
  std::array<bool, kEstimandCount> wanted_estimand{};
  if (cfg.estimands.empty()) {
    wanted_estimand.fill(true);
  } else {
    for (Estimand e : cfg.estimands)
      wanted_estimand[static_cast<std::size_t>(estimand_index(e))] = true;
  }

  const ComparisonRule rule{RuleVariant::BothEvents, 2};
  std::vector<ReplicateOutcome> outcomes(static_cast<std::size_t>(cfg.reps));

  auto worker_body = [&](std::atomic<int>& next) {
    for (;;) {
      const int rep = next.fetch_add(1);
      if (rep >= cfg.reps) break;
      const std::uint64_t rep_root = derive_seed(cfg.seed, static_cast<std::uint64_t>(rep));
      auto& slot = outcomes[static_cast<std::size_t>(rep)];
      try {
        Rng rng(derive_seed(rep_root, 1));
        const Dataset d = generate_dataset(s, rng);
        slot = analyze_replicate(d, rule, cfg, wanted, rep_root);
      } catch (...) {
        // a failed replicate counts as undefined everywhere; the scenario
        // itself keeps running
        for (auto& row : slot.p) row.fill(kNaN);
        slot.pi_tie = 0.0;
      }
    }
  };

  std::atomic<int> next{0};
  const int workers = std::max(1, cfg.workers);
  if (workers == 1) {
    worker_body(next);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back([&] { worker_body(next); });
    for (auto& th : pool) th.join();
  }

  ScenarioResult r;
  r.scenario = s;
  r.reps = cfg.reps;
  r.b_perm = cfg.b_perm;
  r.alpha = cfg.alpha;
  r.seed = cfg.seed;
  r.wald_reference = cfg.wald_use_t ? "t(" + std::to_string(s.m - 2) + ")" : "normal";
  r.fs_reference = cfg.fs_use_t ? "t(" + std::to_string(s.m - 2) + ")" : "normal";
  double tie_sum = 0.0;
  for (const auto& o : outcomes) {
    tie_sum += o.pi_tie;
    for (int p = 0; p < kProcedureCount; ++p) {
      if (!wanted[static_cast<std::size_t>(p)]) continue;
      for (int e = 0; e < kEstimandCount; ++e) {
        if (!wanted_estimand[static_cast<std::size_t>(e)]) continue;
        auto& cell = r.cells[static_cast<std::size_t>(p)][static_cast<std::size_t>(e)];
        const double pv = o.p[static_cast<std::size_t>(p)][static_cast<std::size_t>(e)];
        if (std::isnan(pv)) {
          ++cell.undefined;
        } else {
          ++cell.valid;
          if (pv <= cfg.alpha) ++cell.rejected;
        }
      }
    }
  }
  r.mean_pi_tie = cfg.reps > 0 ? tie_sum / cfg.reps : 0.0;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return r;
}

CalibrationResult calibrate_censoring(const Scenario& s, double target_pi_tie, int reps,
                                      double tol, std::uint64_t seed) {
  if (!(target_pi_tie > 0.0 && target_pi_tie < 1.0))
    throw_invalid("BadTarget", "target tie proportion must lie in (0,1)");
  s.validate();

  const ComparisonRule rule{RuleVariant::BothEvents, 2};
  // common random numbers across xi evaluations: the draw sequence consumes
  // the same uniforms for any xi, so the objective is monotone in xi
  auto mean_tie = [&](double xi) {
    Scenario sc = s;
    sc.xi = xi;
    double sum = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(rep)));
      const Dataset d = generate_dataset(sc, rng);
      sum += estimate_all(tally_cross_arm(d, rule)).pi_tie;
    }
    return sum / reps;
  };

  CalibrationResult out;
  double lo = 1e-6, hi = 1e3;
  double f_lo = mean_tie(lo), f_hi = mean_tie(hi);
  out.trace.push_back({lo, f_lo});
  out.trace.push_back({hi, f_hi});
  if (f_lo > target_pi_tie + tol)
    throw_infeasible("Unbracketable", "tie proportion at xi=1e-6 already exceeds the target");
  if (f_hi < target_pi_tie - tol)
    throw_infeasible("Unbracketable", "tie proportion at xi=1e3 is still below the target");

  double xi = std::sqrt(lo * hi), achieved = 0.0;
  for (int it = 0; it < 40; ++it) {
    xi = std::exp(0.5 * (std::log(lo) + std::log(hi)));
    achieved = mean_tie(xi);
    out.trace.push_back({xi, achieved});
    if (std::abs(achieved - target_pi_tie) < tol) {
      out.converged = true;
      break;
    }
    if (achieved < target_pi_tie)
      lo = xi;
    else
      hi = xi;
  }
  out.xi = xi;
  out.achieved = achieved;
  return out;
}

std::vector<Scenario> parse_scenario_grid(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw_parse("EmptyInput", "grid has no header");
  const std::vector<std::string> expected = {
      "name", "M", "q", "nbar", "cv", "alpha1", "alpha2", "eta",
      "theta1", "theta2", "kappa1", "kappa2", "lambda1", "lambda2", "xi", "tau_c"};
  if (csv::split_line(line) != expected)
    throw_parse("BadHeader",
                "expected header 'name,M,q,nbar,cv,alpha1,alpha2,eta,theta1,theta2,kappa1,kappa2,"
                "lambda1,lambda2,xi,tau_c'");
  std::vector<Scenario> grid;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty() || line == "\r") continue;
    auto cells = csv::split_line(line);
    if (cells.size() != expected.size())
      throw_parse("BadRow", "row " + std::to_string(row_no) + ": expected " +
                                std::to_string(expected.size()) + " cells");
    Scenario s;
    s.name = cells[0];
    s.m = static_cast<int>(csv::parse_int(cells[1], "M", row_no));
    s.q = csv::parse_double(cells[2], "q", row_no);
    s.nbar = csv::parse_double(cells[3], "nbar", row_no);
    s.cv = csv::parse_double(cells[4], "cv", row_no);
    s.alpha1 = csv::parse_double(cells[5], "alpha1", row_no);
    s.alpha2 = csv::parse_double(cells[6], "alpha2", row_no);
    s.eta = csv::parse_double(cells[7], "eta", row_no);
    s.theta1 = csv::parse_double(cells[8], "theta1", row_no);
    s.theta2 = csv::parse_double(cells[9], "theta2", row_no);
    s.kappa1 = csv::parse_double(cells[10], "kappa1", row_no);
    s.kappa2 = csv::parse_double(cells[11], "kappa2", row_no);
    s.lambda1 = csv::parse_double(cells[12], "lambda1", row_no);
    s.lambda2 = csv::parse_double(cells[13], "lambda2", row_no);
    s.xi = csv::parse_double(cells[14], "xi", row_no);
    s.tau_c = csv::parse_double(cells[15], "tau_c", row_no);
    if (s.name.empty())
      throw_parse("BadRow", "row " + std::to_string(row_no) + ": empty scenario name");
    try {
      s.validate();
    } catch (const Error& err) {
      throw_parse("BadRow", "row " + std::to_string(row_no) + ": " + err.what());
    }
    for (const auto& prev : grid)
      if (prev.name == s.name)
        throw_parse("BadRow", "row " + std::to_string(row_no) + ": duplicate scenario name '" +
                                  s.name + "'");
    grid.push_back(std::move(s));
  }
  if (grid.empty()) throw_parse("EmptyInput", "grid has no scenario rows");
  return grid;
}

std::vector<Scenario> read_scenario_grid_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_io("FileNotFound", "cannot open '" + path + "'");
  return parse_scenario_grid(in);
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_scenario_result_csv(std::ostream& out, const ScenarioResult& r) {
  out << "scenario,procedure,estimand,reference,reps,valid,rejected,rejection_rate,undefined,"
         "mean_pi_tie,b_perm,alpha,seed\n";
  for (Procedure p : all_procedures()) {
    bool any = false;
    for (int e = 0; e < kEstimandCount; ++e) {
      const auto& cell = r.cells[static_cast<std::size_t>(p)][static_cast<std::size_t>(e)];
      if (cell.valid + cell.undefined > 0) any = true;
    }
    if (!any) continue;
    std::string ref;
    switch (p) {
      case Procedure::Perm: ref = "permutation"; break;
      case Procedure::JEL: ref = "chisq1"; break;
      case Procedure::FS: ref = r.fs_reference; break;
      default: ref = r.wald_reference; break;
    }
    for (Estimand e : all_estimands()) {
      const auto& cell = r.cell(p, e);
      if (cell.valid + cell.undefined == 0) continue;  // estimand not requested
      out << r.scenario.name << ',' << procedure_name(p) << ',' << estimand_name(e) << ',' << ref
          << ',' << r.reps << ',' << cell.valid << ',' << cell.rejected << ','
          << fmt_double(cell.rate()) << ',' << cell.undefined << ',' << fmt_double(r.mean_pi_tie)
          << ',' << r.b_perm << ',' << fmt_double(r.alpha) << ',' << r.seed << '\n';
    }
  }
}

}  // namespace winscrt
