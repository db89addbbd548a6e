#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "test_support.hpp"
#include "winscrt/errors.hpp"
#include "winscrt/randomization.hpp"

using namespace winscrt;

namespace {

const ComparisonRule kBoth1{RuleVariant::BothEvents, 1};
const ComparisonRule kBoth2{RuleVariant::BothEvents, 2};

ClusterScores make_scores(std::vector<int> arm, std::vector<std::int64_t> s, std::int64_t n1,
                          std::int64_t n0) {
  ClusterScores cs;
  cs.arm = std::move(arm);
  cs.score = std::move(s);
  cs.n1 = n1;
  cs.n0 = n0;
  for (int a : cs.arm) (a == 1 ? cs.m1 : cs.m0) += 1;
  return cs;
}

const WinEstimates kEst = estimate_all(Tallies{3, 1, 2, 2, 3});

// crafted so the observed |WD| is the strict maximum over all 6 allocations
Dataset crafted_four_clusters() {
  return testsup::make_dataset(
      {{1, {{{10, 1}}}}, {1, {{{9, 1}}}}, {0, {{{1, 1}}}}, {0, {{{2, 1}}}}});
}

}  // namespace

TEST_CASE("fs: zero-contrast hand example with denominator sqrt(10/3)") {
  auto cs = make_scores({1, 1, 0, 0}, {1, -1, 2, -2}, 2, 2);
  auto r = fs_score_test(cs, kEst, Estimand::WD, Reference::normal(), 0.05,
                         Alternative::TwoSided);
  CHECK(r.statistic == doctest::Approx(0.0));
  CHECK(r.p_value == doctest::Approx(1.0));
  // the analytical randomization se on the WD scale is sqrt(10/3)/(n1*n0)
  REQUIRE(r.se.has_value());
  CHECK(*r.se == doctest::Approx(std::sqrt(10.0 / 3.0) / 4.0).epsilon(1e-12));
}

TEST_CASE("fs: concentrated-score hand example") {
  auto cs = make_scores({1, 1, 0, 0}, {3, 3, -3, -3}, 2, 2);
  auto r = fs_score_test(cs, kEst, Estimand::WD, Reference::normal(), 0.05,
                         Alternative::TwoSided);
  // 6 / sqrt((0.25*4/3)*36) = 6/sqrt(12)
  CHECK(r.statistic == doctest::Approx(6.0 / std::sqrt(12.0)).epsilon(1e-12));
}

TEST_CASE("fs: degenerate scores give p = 1 with a flag") {
  auto cs = make_scores({1, 1, 0, 0}, {0, 0, 0, 0}, 2, 2);
  auto r = fs_score_test(cs, kEst, Estimand::WD, Reference::normal(), 0.05,
                         Alternative::TwoSided);
  CHECK(r.p_value == 1.0);
  REQUIRE_FALSE(r.warnings.empty());
  CHECK(r.warnings.front().find("DegenerateScores") != std::string::npos);
}

TEST_CASE("fs: statistic invariant to positive rescaling of scores") {
  auto base = make_scores({1, 0, 1, 0, 0}, {4, -3, 2, -1, -2}, 6, 9);
  auto scaled = make_scores({1, 0, 1, 0, 0}, {20, -15, 10, -5, -10}, 6, 9);
  auto r1 = fs_score_test(base, kEst, Estimand::WD, Reference::normal(), 0.05,
                          Alternative::TwoSided);
  auto r2 = fs_score_test(scaled, kEst, Estimand::WD, Reference::normal(), 0.05,
                          Alternative::TwoSided);
  CHECK(r1.statistic == doctest::Approx(r2.statistic).epsilon(1e-12));
}

TEST_CASE("fs: p-value shared across estimands") {
  auto cs = make_scores({1, 1, 0, 0}, {3, 1, -1, -3}, 3, 3);
  auto base = fs_score_test(cs, kEst, Estimand::WD, Reference::normal(), 0.05,
                            Alternative::TwoSided);
  for (auto e : {Estimand::WR, Estimand::WO, Estimand::DOOR}) {
    auto r = fs_score_test(cs, kEst, e, Reference::normal(), 0.05, Alternative::TwoSided);
    CHECK(r.p_value == doctest::Approx(base.p_value));
    CHECK(r.statistic == doctest::Approx(base.statistic));
  }
}

TEST_CASE("permutation: exhaustively enumerated p on the crafted dataset") {
  auto d = crafted_four_clusters();
  PermutationPlan plan;
  plan.mode = PermutationPlan::Mode::FullEnumeration;
  auto r = permutation_test(d, kBoth1, Estimand::WD, plan, Alternative::TwoSided, true);
  CHECK(r.full_enumeration);
  CHECK(r.replicates == 6);
  // observed wd = 1 and its mirror allocation are the only |wd| >= 1
  CHECK(r.observed == doctest::Approx(1.0));
  CHECK(r.p_value == doctest::Approx(2.0 / 6.0));
}

TEST_CASE("permutation: label symmetry under complementation at q = 1/2") {
  Rng rng(2718);
  for (int trial = 0; trial < 20; ++trial) {
    const auto d = testsup::random_dataset(rng, 6, 4, 2);
    if (d.m1 != d.m0) continue;
    PermutationPlan plan;
    plan.mode = PermutationPlan::Mode::FullEnumeration;
    auto r = permutation_test(d, kBoth2, Estimand::WD, plan, Alternative::TwoSided, true);
    // complementing an allocation negates the wd statistic, so the multiset
    // of replicate statistics is symmetric about zero when M1 == M0
    auto stats = r.replicate_stats;
    std::sort(stats.begin(), stats.end());
    for (std::size_t i = 0; i < stats.size(); ++i)
      CHECK(stats[i] == doctest::Approx(-stats[stats.size() - 1 - i]).epsilon(1e-12));
  }
}

TEST_CASE("permutation: all-tie dataset gives p = 1") {
  auto ties = testsup::make_dataset(
      {{1, {{{0, 0}}, {{0, 0}}}}, {0, {{{0, 0}}}}, {1, {{{0, 0}}}}, {0, {{{0, 0}}}}});
  PermutationPlan plan;
  plan.mode = PermutationPlan::Mode::FullEnumeration;
  auto r = permutation_test(ties, kBoth1, Estimand::WD, plan, Alternative::TwoSided);
  CHECK(r.p_value == doctest::Approx(1.0));
}

TEST_CASE("permutation: p-value formula floors and monotonicity") {
  std::vector<double> reps(2000, 0.1);
  // observed beyond every replicate: (1+0)/(B+1)
  CHECK(permutation_p_value(5.0, reps, Alternative::TwoSided, false) ==
        doctest::Approx(1.0 / 2001.0));
  // undefined replicates count as extreme
  reps[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK(permutation_p_value(5.0, reps, Alternative::TwoSided, false) ==
        doctest::Approx(2.0 / 2001.0));
  // p never increases as |observed| grows with the replicate set fixed
  Rng rng(1);
  std::vector<double> stats;
  for (int i = 0; i < 500; ++i) stats.push_back(rng.uniform(-1.0, 1.0));
  double prev = 1.0;
  for (double obs = 0.0; obs <= 1.2; obs += 0.01) {
    const double p = permutation_p_value(obs, stats, Alternative::TwoSided, false);
    CHECK(p <= prev + 1e-15);
    prev = p;
  }
}

TEST_CASE("permutation: cached pair scores equal full re-tallies on relabeled data") {
  Rng rng(909);
  for (int trial = 0; trial < 50; ++trial) {
    const auto d = testsup::random_dataset(rng, 6, 4, 2);
    const auto cache = CrossClusterWins::build(d, kBoth2);

    // walk every allocation with exactly m1 treated labels
    std::vector<int> arm(static_cast<std::size_t>(d.m), 0);
    std::vector<int> comb(static_cast<std::size_t>(d.m1));
    for (int i = 0; i < d.m1; ++i) comb[static_cast<std::size_t>(i)] = i;
    for (;;) {
      std::fill(arm.begin(), arm.end(), 0);
      for (int idx : comb) arm[static_cast<std::size_t>(idx)] = 1;

      const Tallies fast = cache.tally_for(arm);
      Dataset relabeled = d;
      for (int i = 0; i < d.m; ++i)
        relabeled.clusters[static_cast<std::size_t>(i)].arm = arm[static_cast<std::size_t>(i)];
      relabeled.finalize();  // ids unchanged, so cluster order is unchanged
      const Tallies slow = testsup::naive_tallies(relabeled, kBoth2);
      CHECK(fast.wins == slow.wins);
      CHECK(fast.losses == slow.losses);
      CHECK(fast.ties == slow.ties);

      int i = d.m1 - 1;
      while (i >= 0 && comb[static_cast<std::size_t>(i)] == d.m - d.m1 + i) --i;
      if (i < 0) break;
      ++comb[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < d.m1; ++j)
        comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
}

TEST_CASE("permutation: monte carlo runs are seed-deterministic") {
  Rng rng(404);
  const auto d = testsup::random_dataset(rng, 7, 5, 2);
  PermutationPlan plan;
  plan.b = 500;
  plan.seed = 777;
  auto r1 = permutation_test(d, kBoth2, Estimand::WD, plan, Alternative::TwoSided, true);
  auto r2 = permutation_test(d, kBoth2, Estimand::WD, plan, Alternative::TwoSided, true);
  CHECK(r1.p_value == r2.p_value);
  CHECK(r1.replicate_stats == r2.replicate_stats);
}

TEST_CASE("permutation: enumeration cap enforced") {
  CHECK_THROWS_WITH_AS(allocation_count(30, 15, 200000), doctest::Contains("CapExceeded"), Error);
  CHECK(allocation_count(4, 2, 200000) == 6);
  CHECK(allocation_count(20, 10, 200000) == 184756);
}

TEST_CASE("permutation: monte carlo allocations are uniform over the label set") {
  // the crafted dataset's six allocations give wd in {1, .5, 0, 0, -.5, -1};
  // sampled allocation frequencies must match 1/6 each
  auto d = crafted_four_clusters();
  PermutationPlan plan;
  plan.b = 12000;
  plan.seed = 5;
  auto r = permutation_test(d, kBoth1, Estimand::WD, plan, Alternative::TwoSided, true);
  std::map<double, int> freq;
  for (double s : r.replicate_stats) ++freq[s];
  REQUIRE(freq.size() == 5);
  for (auto [value, count] : freq) {
    const double expect = value == 0.0 ? 2.0 / 6.0 : 1.0 / 6.0;
    CHECK(std::abs(static_cast<double>(count) / plan.b - expect) < 0.02);
  }
}

TEST_CASE("permutation: one-sided p-values count the requested tail") {
  auto d = crafted_four_clusters();
  PermutationPlan plan;
  plan.mode = PermutationPlan::Mode::FullEnumeration;
  auto hi = permutation_test(d, kBoth1, Estimand::WD, plan, Alternative::Greater, true);
  auto lo = permutation_test(d, kBoth1, Estimand::WD, plan, Alternative::Less, true);
  // observed wd = 1 is the unique maximum; only itself is >= it
  CHECK(hi.p_value == doctest::Approx(1.0 / 6.0));
  // every allocation statistic is <= 1
  CHECK(lo.p_value == doctest::Approx(1.0));
}
