#include "winscrt/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>

#include "winscrt/errors.hpp"

namespace winscrt {

std::string Reference::name() const {
  switch (kind) {
    case Kind::NormalZ: return "normal";
    case Kind::TwithDF: return "t(" + std::to_string(static_cast<int>(df)) + ")";
    case Kind::ChiSq1: return "chisq1";
    case Kind::PermutationExact: return "permutation";
  }
  return "?";
}

Alternative alternative_from_string(const std::string& s) {
  if (s == "two.sided" || s == "two-sided" || s == "two_sided") return Alternative::TwoSided;
  if (s == "greater") return Alternative::Greater;
  if (s == "less") return Alternative::Less;
  throw_invalid("BadAlternative", "unknown alternative '" + s + "'");
}

std::string alternative_name(Alternative a) {
  switch (a) {
    case Alternative::TwoSided: return "two.sided";
    case Alternative::Greater: return "greater";
    case Alternative::Less: return "less";
  }
  return "?";
}

double normal_cdf(double z) {
  static const boost::math::normal_distribution<double> d(0.0, 1.0);
  return boost::math::cdf(d, z);
}

double normal_quantile(double p) {
  static const boost::math::normal_distribution<double> d(0.0, 1.0);
  return boost::math::quantile(d, p);
}

double student_t_cdf(double t, double df) {
  boost::math::students_t_distribution<double> d(df);
  return boost::math::cdf(d, t);
}

double student_t_quantile(double p, double df) {
  boost::math::students_t_distribution<double> d(df);
  return boost::math::quantile(d, p);
}

double chisq1_cdf(double x) {
  static const boost::math::chi_squared_distribution<double> d(1.0);
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return boost::math::cdf(d, x);
}

double chisq1_quantile(double p) {
  static const boost::math::chi_squared_distribution<double> d(1.0);
  return boost::math::quantile(d, p);
}

double reference_p_value(double statistic, const Reference& ref, Alternative alt) {
  double lower;  // P(Z <= statistic)
  switch (ref.kind) {
    case Reference::Kind::NormalZ:
      lower = normal_cdf(statistic);
      break;
    case Reference::Kind::TwithDF:
      lower = student_t_cdf(statistic, ref.df);
      break;
    default:
      throw_invalid("BadReference", "reference has no z/t form");
  }
  switch (alt) {
    case Alternative::TwoSided: {
      double tail = statistic >= 0.0 ? 1.0 - lower : lower;
      return std::min(1.0, 2.0 * tail);
    }
    case Alternative::Greater: return 1.0 - lower;
    case Alternative::Less: return lower;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double reference_quantile(const Reference& ref, double alpha) {
  switch (ref.kind) {
    case Reference::Kind::NormalZ: return normal_quantile(1.0 - alpha / 2.0);
    case Reference::Kind::TwithDF: return student_t_quantile(1.0 - alpha / 2.0, ref.df);
    default: throw_invalid("BadReference", "reference has no z/t quantile");
  }
}

double atanh2(double x) {
  if (x <= -1.0) return -std::numeric_limits<double>::infinity();
  if (x >= 1.0) return std::numeric_limits<double>::infinity();
  // 2*atanh(x) = log((1+x)/(1-x)) = log1p(2x/(1-x))
  return std::log1p(2.0 * x / (1.0 - x));
}

}  // namespace winscrt
