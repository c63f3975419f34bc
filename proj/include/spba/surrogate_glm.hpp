#pragma once

#include <Eigen/Dense>

#include <vector>

#include "spba/dataset.hpp"

namespace spba {

enum class PenaltyKind { none, rkhs_norm, curvature };

// Basis expansion for the latent logit phi(x) = beta' phi(x).
struct BasisSpec {
  enum class Kind { polynomial, kernel, spline };

  static BasisSpec polynomial(int degree);
  static BasisSpec kernel(std::vector<double> centers, double scale);
  static BasisSpec spline(std::vector<double> knots);

  Kind kind = Kind::polynomial;
  int degree = 1;                 // polynomial
  std::vector<double> centers;    // kernel
  double scale = 1.0;             // kernel
  std::vector<double> knots;      // spline
  PenaltyKind penalty = PenaltyKind::none;

  int dim() const;
  Eigen::VectorXd features(double x) const;
  // beta' J beta penalty matrix for the configured penalty kind.
  Eigen::MatrixXd penalty_matrix() const;
};

// Gaussian radial features exp(-|x - xi_j|^2 / l^2).
Eigen::VectorXd klr_basis(double x, const std::vector<double>& centers, double l);

// Natural-cubic-spline basis (1, x, d_1 - d_{p-1}, ..., d_{p-2} - d_{p-1}).
Eigen::VectorXd spline_basis(double x, const std::vector<double>& knots);

struct GlmFit {
  BasisSpec basis;
  Eigen::VectorXd beta;
  double lambda = 0.0;
  Eigen::MatrixXd penalty;  // J
  bool diverged = false;

  double predict_phi(double x) const { return basis.features(x).dot(beta); }
  double predict_theta(double x) const;
  // Binomial deviance of the fit on a dataset.
  double deviance(const Dataset& d) const;
  double loglik(const Dataset& d) const;
  // Trace of the IRLS hat matrix at convergence (effective dof).
  double hat_trace(const Dataset& d) const;
};

// Penalized binomial MLE via IRLS with step-halving. On divergence (perfect
// separation with lambda = 0) the returned fit carries diverged = true.
GlmFit fit_glm(const Dataset& data, const BasisSpec& basis, double lambda);

// Penalty weight minimizing GCV(lambda) = n Dev / (n - tr H)^2 over the grid.
double gcv_lambda(const Dataset& data, const BasisSpec& basis,
                  const std::vector<double>& grid);
std::vector<double> default_gcv_grid();

// Polynomial degree minimizing AIC = -2 loglik + 2 (degree + 1); ties go to
// the smaller degree.
int aic_degree(const Dataset& data, int max_degree);

}  // namespace spba
