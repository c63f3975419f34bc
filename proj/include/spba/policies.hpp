#pragma once

#include <functional>
#include <random>

#include "spba/knowledge_state.hpp"
#include "spba/surrogate_gp.hpp"

namespace spba {

// Plug-in accuracy estimate p_hat(x) = max{theta_hat, 1 - theta_hat},
// clipped away from 1 so the density update stays finite.
struct AccuracyModel {
  std::function<double(double)> theta_hat;

  double theta(double x) const { return theta_hat(x); }
  double p_hat(double x) const {
    const double th = theta_hat(x);
    return clip_accuracy(th >= 0.5 ? th : 1.0 - th);
  }

  static AccuracyModel constant(double p) {
    return {[p](double) { return p; }};
  }
};

struct PolicyDecision {
  double x = 0.5;
  int a = 1;
};

inline constexpr double kDomainMargin = 1e-4;  // optimize over [delta, 1-delta]

// Expected KL divergence between successive knowledge states when querying a
// replicates at x, in bits. Exact summation over the binomial outcome B.
double info_gain(const KnowledgeState& state, double p_hat, double x, int a);
double info_gain(const KnowledgeState& state, const AccuracyModel& model,
                 double x, int a);

// Greedy global maximization of info_gain: 512-point grid plus the state's
// knots, golden-section refinement around the best three grid points.
PolicyDecision sids_select(const KnowledgeState& state,
                           const AccuracyModel& model, int a);

// Randomized quantile sampling: x = F_n^{-1}(U).
PolicyDecision rqs_select(const KnowledgeState& state, std::mt19937_64& rng,
                          int a);

// One-step adaptive IDS: pick x maximizing the a=1 gain under the GP's
// theta_hat, then size the batch by the lookahead-variance rule.
PolicyDecision ada_sids_select(const KnowledgeState& state,
                               const LatentGpFit& gp, double nu_n, int a0_nu,
                               int cap);

enum class BaselineKind { true_ids, true_rqs, unif };

PolicyDecision baseline_select(BaselineKind kind, const KnowledgeState& state_g,
                               const AccuracyModel& true_model, int a,
                               std::mt19937_64& rng);

// Empirical majority proportion max{B/a, 1-B/a}, clipped like any accuracy.
double local_pbar(int b, int a);

// Two-candidate deterministic IDS used as the local baseline: compare the
// gain at the 25th/75th posterior percentiles under a constant p_bar.
PolicyDecision det_ids_local_select(const KnowledgeState& state, double p_bar,
                                    int a);

}  // namespace spba
