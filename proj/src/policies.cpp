#include "spba/policies.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "spba/numeric.hpp"

namespace spba {

double info_gain(const KnowledgeState& state, double p_hat, double x, int a) {
  if (a < 1) throw std::invalid_argument("info_gain: a >= 1");
  if (!(x > 0.0 && x < 1.0)) throw std::invalid_argument("info_gain: x in (0,1)");
  p_hat = clip_accuracy(p_hat);
  if (p_hat <= 0.5) return 0.0;  // uninformative site

  const double f = state.cdf(x);
  const double lp = std::log(p_hat), lq = std::log1p(-p_hat);
  double gain = 0.0;
  for (int b = 0; b <= a; ++b) {
    // log-likelihoods of B given the root lying left/right of x (no choose)
    const double l_left = b * lq + (a - b) * lp;
    const double l_right = b * lp + (a - b) * lq;
    const double lc = log_sum_exp(std::log(f) + l_left,
                                  std::log1p(-f) + l_right);
    const double lchoose = log_choose(a, b);
    // mass below x scales by e^{l_left - lc}, above by e^{l_right - lc}
    gain += f * std::exp(lchoose + l_left) * (l_left - lc) +
            (1.0 - f) * std::exp(lchoose + l_right) * (l_right - lc);
  }
  return std::max(gain, 0.0) / kLog2;  // nats -> bits
}

double info_gain(const KnowledgeState& state, const AccuracyModel& model,
                 double x, int a) {
  return info_gain(state, model.p_hat(x), x, a);
}

namespace {

PolicyDecision maximize_gain(const KnowledgeState& state,
                             const std::function<double(double)>& p_hat,
                             int a) {
  constexpr int kGrid = 512;
  const double lo = kDomainMargin, hi = 1.0 - kDomainMargin;

  std::vector<double> xs;
  xs.reserve(kGrid + state.knots().size());
  for (int i = 0; i < kGrid; ++i)
    xs.push_back(lo + (hi - lo) * i / (kGrid - 1));
  for (double k : state.knots())
    if (k > lo && k < hi) xs.push_back(k);
  std::sort(xs.begin(), xs.end());

  auto gain_at = [&](double x) { return info_gain(state, p_hat(x), x, a); };

  std::vector<double> vals(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) vals[i] = gain_at(xs[i]);

  std::vector<std::size_t> order(xs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::partial_sort(order.begin(), order.begin() + 3, order.end(),
                    [&](std::size_t i, std::size_t j) { return vals[i] > vals[j]; });

  double best_x = xs[order[0]], best_v = vals[order[0]];
  for (int k = 0; k < 3; ++k) {
    const std::size_t i = order[static_cast<std::size_t>(k)];
    const double a_lo = xs[i == 0 ? 0 : i - 1];
    const double a_hi = xs[std::min(i + 1, xs.size() - 1)];
    if (a_hi <= a_lo) continue;
    const auto [rx, rv] = golden_section_max(gain_at, a_lo, a_hi, 1e-5);
    if (rv > best_v) {
      best_v = rv;
      best_x = rx;
    }
  }
  return {std::clamp(best_x, lo, hi), a};
}

}  // namespace

PolicyDecision sids_select(const KnowledgeState& state,
                           const AccuracyModel& model, int a) {
  return maximize_gain(
      state, [&](double x) { return model.p_hat(x); }, a);
}

PolicyDecision rqs_select(const KnowledgeState& state, std::mt19937_64& rng,
                          int a) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double x = std::clamp(state.quantile(unif(rng)), kDomainMargin,
                              1.0 - kDomainMargin);
  return {x, a};
}

PolicyDecision ada_sids_select(const KnowledgeState& state,
                               const LatentGpFit& gp, double nu_n, int a0_nu,
                               int cap) {
  PolicyDecision d = maximize_gain(
      state,
      [&](double x) {
        const double th = gp.predict_theta(x);
        return th >= 0.5 ? th : 1.0 - th;
      },
      1);
  d.a = adaptive_batch(gp, d.x, nu_n, a0_nu, cap);
  return d;
}

PolicyDecision baseline_select(BaselineKind kind, const KnowledgeState& state_g,
                               const AccuracyModel& true_model, int a,
                               std::mt19937_64& rng) {
  switch (kind) {
    case BaselineKind::true_ids: return sids_select(state_g, true_model, a);
    case BaselineKind::true_rqs: return rqs_select(state_g, rng, a);
    case BaselineKind::unif: {
      std::uniform_real_distribution<double> unif(kDomainMargin,
                                                  1.0 - kDomainMargin);
      return {unif(rng), a};
    }
  }
  throw std::logic_error("baseline_select: unknown kind");
}

double local_pbar(int b, int a) {
  if (a < 1 || b < 0 || b > a) throw std::invalid_argument("local_pbar: 0 <= B <= a");
  const double frac = static_cast<double>(b) / a;
  return clip_accuracy(std::max(frac, 1.0 - frac));
}

PolicyDecision det_ids_local_select(const KnowledgeState& state, double p_bar,
                                    int a) {
  const double xl = std::clamp(state.quantile(0.25), kDomainMargin,
                               1.0 - kDomainMargin);
  const double xr = std::clamp(state.quantile(0.75), kDomainMargin,
                               1.0 - kDomainMargin);
  const double gl = info_gain(state, p_bar, xl, a);
  const double gr = info_gain(state, p_bar, xr, a);
  return {gl >= gr ? xl : xr, a};
}

}  // namespace spba
