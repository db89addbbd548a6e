#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace winscrt {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-based substream derivation: every (root, a, b) triple yields an
// independent seed, so work split across threads never perturbs draws.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t h = splitmix64(root);
  h = splitmix64(h ^ (a + 0x9e3779b97f4a7c15ULL));
  h = splitmix64(h ^ (b + 0xbf58476d1ce4e5b9ULL));
  return h;
}

// mt19937_64 plus hand-rolled samplers. The standard distributions are
// implementation-defined, so the sampling algorithms live here to keep
// seeded runs identical across platforms and standard libraries.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // uniform on the open interval (0,1); never returns an exact endpoint
  double uniform() { return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    auto v = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
    return v >= n ? n - 1 : v;
  }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

  double normal() {
    // Marsaglia polar method
    for (;;) {
      double u = 2.0 * uniform() - 1.0;
      double v = 2.0 * uniform() - 1.0;
      double s = u * u + v * v;
      if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }

  // Marsaglia-Tsang; boosted for shape < 1
  double gamma(double shape, double scale) {
    if (shape < 1.0) {
      double u = uniform();
      return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
    }
  }

  long poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean > 500.0) {
      // additivity keeps exp(-mean) representable
      long half = poisson(mean * 0.5);
      return half + poisson(mean * 0.5);
    }
    double limit = std::exp(-mean);
    long k = 0;
    double prod = uniform();
    while (prod > limit) {
      ++k;
      prod *= uniform();
    }
    return k;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

private:
  std::mt19937_64 eng_;
};

}  // namespace winscrt
