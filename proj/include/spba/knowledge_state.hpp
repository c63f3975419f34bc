#pragma once

#include <iosfwd>
#include <vector>

namespace spba {

// One batched observation feeding the knowledge-state transition.
struct UpdateInput {
  double x;      // query site in (0,1)
  int a;         // replicate count >= 1
  int b;         // positive-sign count in [0, a]
  double p_hat;  // accuracy estimate, must lie in [1/2, 1 - 1e-6]
};

inline constexpr double kAccuracyClipHi = 1.0 - 1e-6;

// Clips an accuracy estimate to the [1/2, 1-1e-6] contract expected by update().
double clip_accuracy(double p);

// Piecewise-constant (pseudo-)posterior density of the root over [0,1].
// Knots are sorted breakpoints (interior knots are past query sites); weights
// are per-interval log-densities. Mass is kept normalized to 1. Instances are
// immutable values: operations return new states.
class KnowledgeState {
 public:
  static KnowledgeState uniform_prior();
  KnowledgeState(std::vector<double> knots, std::vector<double> log_weights);

  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& log_weights() const { return log_w_; }
  std::size_t interval_count() const { return log_w_.size(); }

  double density(double x) const;
  double cdf(double x) const;
  // Smallest x with cdf(x) >= q, linear interpolation within the bracketing interval.
  double quantile(double q) const;
  double median() const { return quantile(0.5); }
  // quantile(1-alpha/2) - quantile(alpha/2)
  double ci_length(double alpha) const;
  bool covers(double alpha, double x_star) const;

  // Same density re-expressed on the union of this state's knots and `extra`.
  KnowledgeState refined(const std::vector<double>& extra) const;

  double total_mass() const;

  // Two-column CSV (knot, density); the last knot repeats the final density.
  void write_csv(std::ostream& os) const;

 private:
  std::vector<double> knots_;
  std::vector<double> log_w_;
  void normalize();
};

// Batched transition: density above x multiplied by p^B (1-p)^(a-B), at or
// below x by (1-p)^B p^(a-B), then renormalized. Throws std::invalid_argument
// on inputs outside the UpdateInput contract.
KnowledgeState update(const KnowledgeState& state, const UpdateInput& in);

enum class LogBase { bits, nats };

// D(f;g) = sum_j log(f_j/g_j) f_j dx_j over the union of knot sets, with the
// conventions 0*log(0/g) = 0 and f>0, g=0 -> +inf.
double kl_divergence(const KnowledgeState& f, const KnowledgeState& g,
                     LogBase base = LogBase::bits);

// Integral of log(f1/f0) weighted by f0; the quantity averaged by the
// information criterion. Returned in the requested base.
double expected_log_ratio(const KnowledgeState& f1, const KnowledgeState& f0,
                          LogBase base = LogBase::bits);

}  // namespace spba
