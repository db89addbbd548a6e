#pragma once

#include <string>

namespace winscrt {

// Reference distribution used to convert a test statistic into a p-value.
struct Reference {
  enum class Kind { NormalZ, TwithDF, ChiSq1, PermutationExact };
  Kind kind = Kind::NormalZ;
  double df = 0.0;  // only for TwithDF

  static Reference normal() { return {Kind::NormalZ, 0.0}; }
  static Reference t_df(double df) { return {Kind::TwithDF, df}; }
  static Reference chisq1() { return {Kind::ChiSq1, 0.0}; }
  static Reference permutation() { return {Kind::PermutationExact, 0.0}; }

  std::string name() const;
};

enum class Alternative { TwoSided, Greater, Less };

Alternative alternative_from_string(const std::string& s);
std::string alternative_name(Alternative a);

double normal_cdf(double z);
double normal_quantile(double p);
double student_t_cdf(double t, double df);
double student_t_quantile(double p, double df);
double chisq1_cdf(double x);
double chisq1_quantile(double p);

// p-value for a z- or t-statistic under the given alternative
double reference_p_value(double statistic, const Reference& ref, Alternative alt);
// two-sided 1-alpha quantile (z or t)
double reference_quantile(const Reference& ref, double alpha);

// 2*atanh(x) via log1p; exact -inf/+inf at the boundary
double atanh2(double x);

}  // namespace winscrt
