#pragma once

#include <cstdint>
#include <vector>

#include "winscrt/outcomes.hpp"

namespace winscrt {

// Cross-arm win/loss/tie counts. W + L + T == n1*n0 always.
struct Tallies {
  std::int64_t wins = 0;
  std::int64_t losses = 0;
  std::int64_t ties = 0;
  std::int64_t n1 = 0;
  std::int64_t n0 = 0;
  std::int64_t pairs() const { return n1 * n0; }
};

// Net pairwise score of each cluster against the whole sample; sum is 0.
struct ClusterScores {
  std::vector<std::int64_t> score;  // S_i
  std::vector<int> arm;             // A_i
  std::int64_t n1 = 0;
  std::int64_t n0 = 0;
  int m1 = 0;
  int m0 = 0;
  int m() const { return m1 + m0; }
  double q() const { return static_cast<double>(m1) / static_cast<double>(m()); }
};

// Centered per-subject win/loss projections and their cluster sums.
struct ProjectionTable {
  // indexed [cluster][subject], centered by the arm-wide pi-hat
  std::vector<std::vector<double>> phi_win;
  std::vector<std::vector<double>> phi_loss;
  std::vector<double> g_win;   // per cluster
  std::vector<double> g_loss;  // per cluster
  std::vector<int> arm;
  double nbar1 = 0.0;
  double nbar0 = 0.0;
  int m1 = 0;
  int m0 = 0;
  double pi_win = 0.0;
  double pi_loss = 0.0;
};

struct DeletedTallySet {
  Tallies full;
  std::vector<Tallies> deleted;       // tallies with cluster i removed
  std::vector<bool> degenerate;       // deletion emptied an arm
  std::vector<int> arm;
};

// Cross-cluster win-count matrix: wins(i,k) = number of subject pairs
// (j in i, l in k) where the subject of cluster i wins. Built in one
// O(n^2) pass; tallies for any treatment labeling, cluster scores, and
// leave-one-cluster tallies all derive from it without re-comparing.
class CrossClusterWins {
public:
  CrossClusterWins() = default;
  static CrossClusterWins build(const Dataset& d, const ComparisonRule& rule, int threads = 1);

  int m() const { return m_; }
  std::int64_t wins(int i, int k) const { return w_[static_cast<std::size_t>(i) * m_ + k]; }
  std::int64_t size_of(int i) const { return sizes_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& arm() const { return arm_; }

  Tallies tally_for(const std::vector<int>& arm) const;
  Tallies tally_observed() const { return tally_for(arm_); }
  ClusterScores scores() const;
  DeletedTallySet leave_one_cluster() const;

private:
  int m_ = 0;
  std::vector<std::int64_t> w_;      // m*m, diagonal zero
  std::vector<std::int64_t> sizes_;  // N_i
  std::vector<int> arm_;
};

Tallies tally_cross_arm(const Dataset& d, const ComparisonRule& rule, int threads = 1);
ClusterScores cluster_scores(const Dataset& d, const ComparisonRule& rule, int threads = 1);
ProjectionTable subject_projections(const Dataset& d, const ComparisonRule& rule);
DeletedTallySet leave_one_cluster(const Dataset& d, const ComparisonRule& rule);

}  // namespace winscrt
