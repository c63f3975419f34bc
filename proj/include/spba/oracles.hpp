#pragma once

#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace spba {

// One batched oracle call: a sign replicates at x, b of them positive.
struct BatchResponse {
  double x;
  int a;
  int b;
};

// A noisy sign oracle. All oracles present the decreasing-h convention
// through query_batch(): a positive response indicates the root lies to the
// right of x (theta(x) > 1/2 for x < x*). Oracles whose underlying response
// is increasing in x negate it internally.
class Oracle {
 public:
  virtual ~Oracle() = default;

  virtual double domain_lo() const = 0;
  virtual double domain_hi() const = 0;

  virtual bool has_true_theta() const { return false; }
  // P(positive response) under the normalized convention.
  virtual double true_theta(double /*x*/) const {
    throw std::logic_error("true theta unavailable for this oracle");
  }
  // p(x) = max{theta(x), 1-theta(x)}
  double true_accuracy(double x) const;

  // a sign replicates at x; b counts positive (normalized) signs.
  virtual BatchResponse query_batch(double x, int a, std::mt19937_64& rng) const = 0;

  // Underlying oracle evaluations charged per recorded sign (pre-averaging).
  virtual int cost_per_sign() const { return 1; }
};

// Test functions with Gaussian heteroscedastic noise and known ground truth:
//   linear       h(x) = x* - x,            sigma = 0.2
//   exponential  h(x) = e^{2(x*-x)} - 1,   sigma = 0.2 left of x*, 1 right
//   cubic        h(x) = (x* - x)^3,        sigma = 0.025
// All are decreasing, so no sign normalization is needed.
class SyntheticOracle : public Oracle {
 public:
  enum class Kind { linear, exponential, cubic };

  SyntheticOracle(Kind kind, double x_star);
  static Kind kind_from_string(const std::string& s);

  double domain_lo() const override { return 0.0; }
  double domain_hi() const override { return 1.0; }
  double x_star() const { return x_star_; }

  double h(double x) const;
  double sigma(double x) const;

  bool has_true_theta() const override { return true; }
  double true_theta(double x) const override;

  BatchResponse query_batch(double x, int a, std::mt19937_64& rng) const override;

 private:
  Kind kind_;
  double x_star_;
};

// Bermudan-put pathwise oracle (Longstaff-Schwartz style continuation vs
// immediate exercise), with pre-averaging of R raw timing values per sign.
// The raw timing value is increasing in the asset price, so query_batch()
// flips the raw signs to present the decreasing-h convention.
class BermudanOracle : public Oracle {
 public:
  struct Params {
    double strike = 40.0;
    double rate = 0.06;
    double vol = 0.25;
    double maturity = 1.0;
    double dt = 0.04;
    double t_eval = 0.6;
    int pre_average = 25;  // R
    double lo = 25.0;
    double hi = 40.0;
  };

  // time -> continuation boundary, one entry per exercise date in (t_eval, maturity)
  using BoundaryTable = std::vector<std::pair<double, double>>;

  BermudanOracle(Params params, BoundaryTable boundary);

  double domain_lo() const override { return params_.lo; }
  double domain_hi() const override { return params_.hi; }
  int cost_per_sign() const override { return params_.pre_average; }
  const Params& params() const { return params_; }
  const BoundaryTable& boundary() const { return boundary_; }

  // Discounted exercise payoff e^{-rt}(K - x)_+.
  double payoff(double t, double x) const;

  // One pathwise timing value H(tau, x_tau) - H(t, x) from a geometric
  // random walk started at (t_eval, x).
  double raw_path_value(double x, std::mt19937_64& rng) const;

  // Raw pre-averaged signs: b counts positive means of R path values.
  BatchResponse raw_query_batch(double x, int a_signs, std::mt19937_64& rng) const;

  // Normalized (decreasing-h) signs: b = a - b_raw.
  BatchResponse query_batch(double x, int a, std::mt19937_64& rng) const override;

  // Backward sweep producing a boundary table for every exercise date in
  // (t_eval, maturity). Each date's boundary is the zero of the mean timing
  // value in x: a coarse grid scan brackets the sign change, then a local
  // linear regression of fine-grid means pins the root.
  static BoundaryTable compute_boundary(const Params& params, std::uint64_t seed,
                                        int paths_coarse = 2000,
                                        int paths_fine = 20000);

  static void write_boundary_csv(const BoundaryTable& table, const std::string& path);
  static BoundaryTable read_boundary_csv(const std::string& path);

 private:
  Params params_;
  BoundaryTable boundary_;
  int steps_from(double t) const;
};

}  // namespace spba
