#pragma once

#include <Eigen/Dense>

#include <optional>
#include <utility>

#include "spba/dataset.hpp"

namespace spba {

// E[Theta(phi)] for phi ~ Normal(m, s2), by 100-point Gauss-Hermite.
double logistic_gauss_mean(double m, double s2);

// Matern-5/2 hyperparameters.
struct MaternHyper {
  double tau2 = 1.0;  // process variance
  double ell = 1.0;   // length-scale
};

// tau^2 [1 + sqrt(5) r/l + 5 r^2/(3 l^2)] e^{-sqrt(5) r/l}
double matern52(const MaternHyper& hyper, double x1, double x2);

// Hyperprior for MAP estimation: improper uniform on tau, Student-t on the
// length-scale.
struct HyperPriors {
  double t_dof = 4.0;
  double t_scale = 1.0;
};

// Laplace-approximated binomial-GP posterior at fixed hyperparameters.
// Immutable once constructed; predictions are read-only.
class LatentGpFit {
 public:
  // Fits the mode by Newton iterations on the penalized binomial
  // log-likelihood. Throws on non-convergence or a kernel matrix that stays
  // non-PD after maximal jitter.
  LatentGpFit(Dataset data, MaternHyper hyper);

  const Dataset& data() const { return data_; }
  const MaternHyper& hyper() const { return hyper_; }
  const Eigen::VectorXd& mode() const { return mode_; }
  const Eigen::VectorXd& hessian_diag() const { return w_; }
  // Jittered kernel matrix actually used by the fit.
  const Eigen::MatrixXd& fitted_kernel() const { return k_; }

  // max-norm of mode - K u(mode); convergence certificate
  double stationarity_residual() const;

  // Predictive latent (mean, variance) at x.
  std::pair<double, double> predict_latent(double x) const;
  // Gauss-Hermite average of the logistic link over the latent predictive.
  double predict_theta(double x) const;

  // Marginal log-likelihood of the data at the fitted mode (Laplace
  // approximation), used by MAP hyperparameter search.
  double log_marginal() const { return log_marginal_; }

 private:
  Dataset data_;
  MaternHyper hyper_;
  Eigen::VectorXd mode_;
  Eigen::VectorXd w_;                  // a_i Theta(phi_i)(1 - Theta(phi_i))
  Eigen::VectorXd alpha_;              // K^{-1} mode, cached for the mean
  Eigen::MatrixXd k_;                  // jittered kernel matrix
  Eigen::LLT<Eigen::MatrixXd> vcov_;   // factorization of K + W^{-1}
  double log_marginal_ = 0.0;

  Eigen::VectorXd kernel_vec(double x) const;
};

struct MapResult {
  MaternHyper hyper;
  bool converged = true;
};

// Interleaved MAP search: Laplace refit at fixed hyperparameters alternated
// with Nelder-Mead maximization of the Laplace marginal likelihood plus
// hyperprior over (log tau^2, log ell). With no warm start the first round
// uses `restarts` Latin-square starting points over [log 1e-2, log 1e2]^2.
MapResult map_hyperparams(const Dataset& data, const HyperPriors& priors,
                          std::optional<MaternHyper> warm_start = std::nullopt,
                          int restarts = 5, int max_outer = 20);

// One-step look-ahead latent variance from adding a_new replicates at x:
// (1/s_n^2(x) + 1/(a_new theta(1-theta)))^{-1} with theta = predict_theta(x).
double lookahead_variance(const LatentGpFit& fit, double x, double a_new);

// Replicate count driving the look-ahead variance below nu; a0_nu when the
// site is already well explored, clipped to [a0_nu, cap] otherwise.
int adaptive_batch(const LatentGpFit& fit, double x, double nu, int a0_nu, int cap);

}  // namespace spba
