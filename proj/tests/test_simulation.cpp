#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "winscrt/errors.hpp"
#include "winscrt/pairwise.hpp"
#include "winscrt/simulation.hpp"

using namespace winscrt;

namespace {

// Kendall's tau in O(n log n): discordant pairs = inversions of y after
// sorting by x (continuous margins, ties have probability zero)
std::int64_t count_inversions(std::vector<double>& v, std::vector<double>& buf, std::size_t lo,
                              std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = (lo + hi) / 2;
  std::int64_t inv = count_inversions(v, buf, lo, mid) + count_inversions(v, buf, mid, hi);
  std::merge(v.begin() + static_cast<std::ptrdiff_t>(lo), v.begin() + static_cast<std::ptrdiff_t>(mid),
             v.begin() + static_cast<std::ptrdiff_t>(mid), v.begin() + static_cast<std::ptrdiff_t>(hi),
             buf.begin() + static_cast<std::ptrdiff_t>(lo));
  std::size_t i = lo, j = mid;
  for (std::size_t k = lo; k < hi; ++k) {
    if (i < mid && (j >= hi || v[i] <= v[j])) {
      inv += static_cast<std::int64_t>(j - mid);
      ++i;
    } else {
      ++j;
    }
  }
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return inv;
}

double kendall_tau(std::vector<std::pair<double, double>> pts) {
  std::sort(pts.begin(), pts.end());
  std::vector<double> y;
  y.reserve(pts.size());
  for (const auto& p : pts) y.push_back(p.second);
  std::vector<double> buf(y.size());
  const auto n = static_cast<std::int64_t>(y.size());
  const std::int64_t disc = count_inversions(y, buf, 0, y.size());
  const std::int64_t total = n * (n - 1) / 2;
  return 1.0 - 2.0 * static_cast<double>(disc) / static_cast<double>(total);
}

double ks_uniform(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  double d = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    d = std::max({d, std::abs(x[i] - lo), std::abs(x[i] - hi)});
  }
  return d;
}

Scenario base_scenario() {
  Scenario s;
  s.name = "test";
  s.m = 10;
  s.nbar = 10.0;
  s.cv = 0.3;
  s.alpha1 = s.alpha2 = 2.0;
  s.eta = 2.0;
  s.theta1 = s.theta2 = 0.0;
  s.xi = 0.03;
  s.tau_c = 80.0;
  return s;
}

}  // namespace

TEST_CASE("cluster sizes: degenerate, moment-matched, and truncated draws") {
  Rng rng(555);
  auto fixed = draw_cluster_sizes(20.0, 0.0, 50, 5, rng);
  for (int n : fixed.sizes) CHECK(n == 20);

  // nbar 20, cv 0.3 over 1e4 draws: mean within 5%, cv within 10%
  std::vector<int> all;
  for (int i = 0; i < 10; ++i) {
    auto draw = draw_cluster_sizes(20.0, 0.3, 1000, 5, rng);
    CHECK_FALSE(draw.poisson_fallback);
    all.insert(all.end(), draw.sizes.begin(), draw.sizes.end());
  }
  double mean = 0.0;
  for (int n : all) mean += n;
  mean /= static_cast<double>(all.size());
  double var = 0.0;
  for (int n : all) var += (n - mean) * (n - mean);
  var /= static_cast<double>(all.size()) - 1.0;
  const double cv = std::sqrt(var) / mean;
  CHECK(mean > 19.0);
  CHECK(mean < 21.0);
  CHECK(cv > 0.27);
  CHECK(cv < 0.33);

  // heavier dispersion still respects the floor
  auto heavy = draw_cluster_sizes(20.0, 0.5, 2000, 5, rng);
  CHECK(*std::min_element(heavy.sizes.begin(), heavy.sizes.end()) >= 5);

  // requested variance below the Poisson floor falls back, flagged
  auto tight = draw_cluster_sizes(20.0, 0.1, 100, 5, rng);
  CHECK(tight.poisson_fallback);
  for (int n : tight.sizes) CHECK(n >= 5);
}

TEST_CASE("gumbel pairs: kendall tau matches 1 - 1/eta") {
  const int n = 100000;
  for (double eta : {1.0, 2.0, 4.0}) {
    Rng rng(derive_seed(7000, static_cast<std::uint64_t>(eta * 10)));
    std::vector<std::pair<double, double>> pts;
    pts.reserve(n);
    for (int i = 0; i < n; ++i) pts.push_back(sample_gumbel_pair(eta, rng));
    const double tau = kendall_tau(pts);
    CHECK(std::abs(tau - (1.0 - 1.0 / eta)) < 0.02);
  }
}

TEST_CASE("gumbel pairs: margins are uniform") {
  const int n = 100000;
  // 1% KS critical value ~ 1.628/sqrt(n)
  const double crit = 1.628 / std::sqrt(static_cast<double>(n));
  for (double eta : {1.0, 2.0, 4.0}) {
    Rng rng(derive_seed(7100, static_cast<std::uint64_t>(eta * 10)));
    std::vector<double> u1, u2;
    u1.reserve(n);
    u2.reserve(n);
    for (int i = 0; i < n; ++i) {
      auto [a, b] = sample_gumbel_pair(eta, rng);
      u1.push_back(a);
      u2.push_back(b);
    }
    CHECK(ks_uniform(u1) < crit);
    CHECK(ks_uniform(u2) < crit);
  }
}

TEST_CASE("frailty draws: mean 1 and variance 1/alpha") {
  const int n = 100000;
  for (double alpha : {1.0, 2.0}) {
    Rng rng(derive_seed(7200, static_cast<std::uint64_t>(alpha)));
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double g = rng.gamma(alpha, 1.0 / alpha);
      sum += g;
      sumsq += g * g;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(std::abs(mean - 1.0) < 0.02);
    CHECK(std::abs(var - 1.0 / alpha) / (1.0 / alpha) < 0.05);
  }
}

TEST_CASE("weibull inversion: hand values") {
  CHECK(invert_weibull_ph(std::exp(-1.0), 1.0, 1.0, 1.0, 0.0, 0) == doctest::Approx(1.0));
  CHECK(invert_weibull_ph(std::exp(-1.0), 2.0, 1.0, 1.0, 0.0, 0) == doctest::Approx(1.0));
  CHECK(invert_weibull_ph(0.5, 1.0, 0.1, 2.0, std::log(0.65), 1) ==
        doctest::Approx(std::log(2.0) / (0.1 * 2.0 * 0.65)).epsilon(1e-12));
}

TEST_CASE("generated data: allocation, semi-competing invariant, components") {
  auto s = base_scenario();
  s.m = 20;
  int checked_subjects = 0;
  for (int rep = 0; checked_subjects < 100000; ++rep) {
    Rng rng(derive_seed(7300, static_cast<std::uint64_t>(rep)));
    const Dataset d = generate_dataset(s, rng);
    CHECK(d.m1 == s.treated_clusters());
    CHECK(d.components == 2);
    for (const auto& c : d.clusters) {
      CHECK(static_cast<int>(c.subjects.size()) >= s.min_cluster_size);
      for (const auto& subj : c.subjects) {
        const auto& term = subj.components[0];
        const auto& nonterm = subj.components[1];
        ++checked_subjects;
        CHECK(nonterm.time <= term.time);
        if (nonterm.event) {
          // an observed nonterminal event strictly precedes death/censoring
          CHECK(nonterm.time < term.time);
        }
      }
    }
  }
}

TEST_CASE("generated data: degenerate censoring produces an all-tie dataset") {
  auto s = base_scenario();
  s.xi = 1e9;
  Rng rng(7400);
  const Dataset d = generate_dataset(s, rng);
  const auto t = tally_cross_arm(d, ComparisonRule{RuleVariant::BothEvents, 2});
  CHECK(t.wins == 0);
  CHECK(t.losses == 0);
  CHECK(estimate_all(t).wd == 0.0);
}

TEST_CASE("generated data: null configuration is symmetric on average") {
  auto s = base_scenario();
  double sum_wd = 0.0;
  const int reps = 500;
  for (int rep = 0; rep < reps; ++rep) {
    Rng rng(derive_seed(7500, static_cast<std::uint64_t>(rep)));
    const Dataset d = generate_dataset(s, rng);
    sum_wd += estimate_all(tally_cross_arm(d, ComparisonRule{RuleVariant::BothEvents, 2})).wd;
  }
  CHECK(std::abs(sum_wd / reps) < 0.01);
}

TEST_CASE("generated data: bit-identical under the same seed") {
  auto s = base_scenario();
  Rng r1(991), r2(991);
  const Dataset a = generate_dataset(s, r1);
  const Dataset b = generate_dataset(s, r2);
  REQUIRE(a.m == b.m);
  for (int i = 0; i < a.m; ++i) {
    const auto& ca = a.clusters[static_cast<std::size_t>(i)];
    const auto& cb = b.clusters[static_cast<std::size_t>(i)];
    CHECK(ca.arm == cb.arm);
    REQUIRE(ca.subjects.size() == cb.subjects.size());
    for (std::size_t j = 0; j < ca.subjects.size(); ++j)
      for (std::size_t v = 0; v < 2; ++v) {
        CHECK(ca.subjects[j].components[v].time == cb.subjects[j].components[v].time);
        CHECK(ca.subjects[j].components[v].event == cb.subjects[j].components[v].event);
      }
  }
}

TEST_CASE("run_scenario: deterministic cells and sane aggregation") {
  auto s = base_scenario();
  RunConfig cfg;
  cfg.reps = 20;
  cfg.b_perm = 50;
  cfg.seed = 17;
  const auto r1 = run_scenario(s, cfg);
  const auto r2 = run_scenario(s, cfg);
  for (Procedure p : all_procedures()) {
    for (Estimand e : all_estimands()) {
      CHECK(r1.cell(p, e).rejected == r2.cell(p, e).rejected);
      CHECK(r1.cell(p, e).valid == r2.cell(p, e).valid);
      CHECK(r1.cell(p, e).valid + r1.cell(p, e).undefined == cfg.reps);
    }
  }
  CHECK(r1.mean_pi_tie == r2.mean_pi_tie);

  std::ostringstream c1, c2;
  write_scenario_result_csv(c1, r1);
  write_scenario_result_csv(c2, r2);
  CHECK(c1.str() == c2.str());
}

TEST_CASE("run_scenario: worker threads do not change the results") {
  auto s = base_scenario();
  RunConfig cfg;
  cfg.reps = 12;
  cfg.b_perm = 40;
  cfg.seed = 23;
  cfg.workers = 1;
  const auto serial = run_scenario(s, cfg);
  cfg.workers = 4;
  const auto parallel = run_scenario(s, cfg);
  std::ostringstream a, b;
  write_scenario_result_csv(a, serial);
  write_scenario_result_csv(b, parallel);
  CHECK(a.str() == b.str());
}

TEST_CASE("calibration: hits the reference tie anchors" * doctest::timeout(120)) {
  // the two censoring regimes used throughout the study design
  Scenario s;
  s.m = 20;
  s.nbar = 20;
  s.cv = 0.3;
  s.alpha1 = s.alpha2 = 2;
  s.eta = 1;
  s.tau_c = 80;
  const auto heavy = calibrate_censoring(s, 0.35, 20, 0.01, 31);
  CHECK(heavy.converged);
  CHECK(heavy.achieved > 0.34);
  CHECK(heavy.achieved < 0.36);
  const auto light = calibrate_censoring(s, 0.07, 20, 0.01, 31);
  CHECK(light.converged);
  CHECK(light.achieved > 0.06);
  CHECK(light.achieved < 0.08);
  CHECK(light.xi < heavy.xi);
}

TEST_CASE("calibration: reaches an achievable target and rejects impossible ones") {
  auto s = base_scenario();
  s.m = 10;
  const auto res = calibrate_censoring(s, 0.5, 10, 0.02, 99);
  CHECK(res.converged);
  CHECK(std::abs(res.achieved - 0.5) < 0.02);
  CHECK(res.xi > 0.0);

  // the tie floor for this configuration sits near 3.5%, far above 0.5%
  CHECK_THROWS_WITH_AS(calibrate_censoring(s, 0.005, 5, 0.01, 99),
                       doctest::Contains("Unbracketable"), Error);
}

TEST_CASE("scenario grid: parse round trip and row errors") {
  const char* grid =
      "name,M,q,nbar,cv,alpha1,alpha2,eta,theta1,theta2,kappa1,kappa2,lambda1,lambda2,xi,tau_c\n"
      "null_a,20,0.5,20,0.3,2,2,1,0,0,1,1,0.1,0.2,0.31,4\n"
      "alt_b,100,0.5,20,0.5,1,1,4,-0.4308,-0.6931,1,1,0.1,0.2,0.02,4\n";
  std::istringstream in(grid);
  auto scenarios = parse_scenario_grid(in);
  REQUIRE(scenarios.size() == 2);
  CHECK(scenarios[0].name == "null_a");
  CHECK(scenarios[0].m == 20);
  CHECK(scenarios[1].eta == 4.0);
  CHECK(scenarios[1].theta2 == doctest::Approx(-0.6931));

  std::istringstream bad(
      "name,M,q,nbar,cv,alpha1,alpha2,eta,theta1,theta2,kappa1,kappa2,lambda1,lambda2,xi,tau_c\n"
      "oops,20,0.5,20,0.3,2,2,oops,0,0,1,1,0.1,0.2,0.31,4\n");
  CHECK_THROWS_WITH_AS(parse_scenario_grid(bad), doctest::Contains("row 2"), Error);
}
