#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

namespace spba {

inline constexpr double kLog2 = 0.6931471805599453;

// Standard normal CDF.
inline double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Logistic link Theta(phi) = 1/(1+e^-phi).
inline double logistic(double phi) {
  if (phi >= 0.0) return 1.0 / (1.0 + std::exp(-phi));
  const double e = std::exp(phi);
  return e / (1.0 + e);
}

inline double logit(double theta) { return std::log(theta / (1.0 - theta)); }

// log(e^a + e^b) without overflow.
inline double log_sum_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// log C(n, k) via lgamma.
inline double log_choose(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// SplitMix64; used to derive independent per-run seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Golden-section search for the maximum of f on [lo, hi]; f assumed unimodal
// within the bracket. Returns (argmax, max).
std::pair<double, double> golden_section_max(const std::function<double(double)>& f,
                                             double lo, double hi, double tol);

// Gauss-Hermite nodes/weights for n points (physicists' weight e^{-t^2}),
// computed by Golub-Welsch. Cached per n.
struct GaussHermite {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussHermite& gauss_hermite(int n);

// Minimal Nelder-Mead maximizer. Returns argmax found.
std::vector<double> nelder_mead_max(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> start, double step,
                                    int max_evals, double ftol);

}  // namespace spba
