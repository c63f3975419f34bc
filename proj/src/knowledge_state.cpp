#include "spba/knowledge_state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "spba/numeric.hpp"

namespace spba {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double clip_accuracy(double p) { return std::min(std::max(p, 0.5), kAccuracyClipHi); }

KnowledgeState::KnowledgeState(std::vector<double> knots, std::vector<double> log_weights)
    : knots_(std::move(knots)), log_w_(std::move(log_weights)) {
  if (knots_.size() < 2 || log_w_.size() + 1 != knots_.size())
    throw std::invalid_argument("KnowledgeState: inconsistent knots/weights");
  if (knots_.front() != 0.0 || knots_.back() != 1.0)
    throw std::invalid_argument("KnowledgeState: knots must span [0,1]");
  if (!std::is_sorted(knots_.begin(), knots_.end()))
    throw std::invalid_argument("KnowledgeState: knots must be increasing");
  normalize();
}

KnowledgeState KnowledgeState::uniform_prior() {
  return KnowledgeState({0.0, 1.0}, {0.0});
}

void KnowledgeState::normalize() {
  // log of total mass via log-sum-exp over log_w_j + log(dx_j)
  double m = -kInf;
  for (std::size_t j = 0; j < log_w_.size(); ++j) {
    const double dx = knots_[j + 1] - knots_[j];
    if (dx > 0.0) m = std::max(m, log_w_[j] + std::log(dx));
  }
  double s = 0.0;
  for (std::size_t j = 0; j < log_w_.size(); ++j) {
    const double dx = knots_[j + 1] - knots_[j];
    if (dx > 0.0) s += std::exp(log_w_[j] + std::log(dx) - m);
  }
  const double log_mass = m + std::log(s);
  for (double& w : log_w_) w -= log_mass;
}

double KnowledgeState::density(double x) const {
  if (x <= knots_.front()) return std::exp(log_w_.front());
  if (x >= knots_.back()) return std::exp(log_w_.back());
  // intervals are (knots_[j], knots_[j+1]]
  const auto it = std::lower_bound(knots_.begin(), knots_.end(), x);
  std::size_t j = static_cast<std::size_t>(it - knots_.begin());
  if (*it != x) --j;  // x strictly inside interval j-1..j
  else --j;           // x at right endpoint of interval j-1
  return std::exp(log_w_[std::min(j, log_w_.size() - 1)]);
}

double KnowledgeState::cdf(double x) const {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double cum = 0.0;
  for (std::size_t j = 0; j < log_w_.size(); ++j) {
    const double lo = knots_[j], hi = knots_[j + 1];
    const double d = std::exp(log_w_[j]);
    if (x <= hi) return cum + d * (x - lo);
    cum += d * (hi - lo);
  }
  return 1.0;
}

double KnowledgeState::quantile(double q) const {
  if (q < 0.0 || q > 1.0) throw std::invalid_argument("quantile: q outside [0,1]");
  if (q <= 0.0) return 0.0;
  double cum = 0.0;
  for (std::size_t j = 0; j < log_w_.size(); ++j) {
    const double lo = knots_[j], hi = knots_[j + 1];
    const double d = std::exp(log_w_[j]);
    const double mass = d * (hi - lo);
    if (cum + mass >= q) {
      if (mass <= 0.0) return lo;
      return std::min(hi, lo + (q - cum) / d);
    }
    cum += mass;
  }
  return 1.0;
}

double KnowledgeState::ci_length(double alpha) const {
  return quantile(1.0 - alpha / 2.0) - quantile(alpha / 2.0);
}

bool KnowledgeState::covers(double alpha, double x_star) const {
  return x_star >= quantile(alpha / 2.0) && x_star <= quantile(1.0 - alpha / 2.0);
}

double KnowledgeState::total_mass() const {
  double s = 0.0;
  for (std::size_t j = 0; j < log_w_.size(); ++j)
    s += std::exp(log_w_[j]) * (knots_[j + 1] - knots_[j]);
  return s;
}

KnowledgeState KnowledgeState::refined(const std::vector<double>& extra) const {
  std::vector<double> merged = knots_;
  for (double x : extra) {
    if (x > 0.0 && x < 1.0) merged.push_back(x);
  }
  std::sort(merged.begin(), merged.end());
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
  std::vector<double> lw(merged.size() - 1);
  std::size_t j = 0;
  for (std::size_t k = 0; k + 1 < merged.size(); ++k) {
    // interval (merged[k], merged[k+1]] lies inside original interval j
    while (j + 1 < log_w_.size() && knots_[j + 1] <= merged[k]) ++j;
    lw[k] = log_w_[j];
  }
  return KnowledgeState(std::move(merged), std::move(lw));
}

void KnowledgeState::write_csv(std::ostream& os) const {
  os << "knot,density\n";
  for (std::size_t j = 0; j < log_w_.size(); ++j)
    os << knots_[j] << ',' << std::exp(log_w_[j]) << '\n';
  os << knots_.back() << ',' << std::exp(log_w_.back()) << '\n';
}

KnowledgeState update(const KnowledgeState& state, const UpdateInput& in) {
  if (in.a < 1 || in.b < 0 || in.b > in.a)
    throw std::invalid_argument("update: B outside [0, a]");
  if (in.x <= 0.0 || in.x >= 1.0)
    throw std::invalid_argument("update: x outside (0,1)");
  if (in.p_hat < 0.5 || in.p_hat > kAccuracyClipHi)
    throw std::invalid_argument("update: p_hat outside [1/2, 1-1e-6]; clip first");

  KnowledgeState r = state.refined({in.x});
  const double log_p = std::log(in.p_hat);
  const double log_q = std::log1p(-in.p_hat);
  const double w_right = in.b * log_p + (in.a - in.b) * log_q;  // u > x
  const double w_left = in.b * log_q + (in.a - in.b) * log_p;   // u <= x

  std::vector<double> knots = r.knots();
  std::vector<double> lw = r.log_weights();
  for (std::size_t j = 0; j < lw.size(); ++j) {
    lw[j] += (knots[j + 1] <= in.x) ? w_left : w_right;
  }
  return KnowledgeState(std::move(knots), std::move(lw));
}

namespace {

// Shared accumulation over the union grid of two states.
template <typename Term>
double accumulate_on_union(const KnowledgeState& f, const KnowledgeState& g, Term term) {
  const KnowledgeState fr = f.refined(g.knots());
  const KnowledgeState gr = g.refined(f.knots());
  const auto& knots = fr.knots();
  double s = 0.0;
  for (std::size_t j = 0; j + 1 < knots.size(); ++j) {
    const double dx = knots[j + 1] - knots[j];
    if (dx <= 0.0) continue;
    const double t = term(std::exp(fr.log_weights()[j]), std::exp(gr.log_weights()[j]),
                          fr.log_weights()[j], gr.log_weights()[j]);
    if (t == kInf) return kInf;
    s += t * dx;
  }
  return s;
}

}  // namespace

double kl_divergence(const KnowledgeState& f, const KnowledgeState& g, LogBase base) {
  const double v = accumulate_on_union(
      f, g, [](double fd, double gd, double lf, double lg) {
        if (fd == 0.0) return 0.0;
        if (gd == 0.0) return kInf;
        return fd * (lf - lg);
      });
  return base == LogBase::bits ? v / kLog2 : v;
}

double expected_log_ratio(const KnowledgeState& f1, const KnowledgeState& f0, LogBase base) {
  const double v = accumulate_on_union(
      f1, f0, [](double f1d, double f0d, double l1, double l0) {
        if (f0d == 0.0) return 0.0;
        if (f1d == 0.0) return -kInf;
        return f0d * (l1 - l0);
      });
  return base == LogBase::bits ? v / kLog2 : v;
}

}  // namespace spba
