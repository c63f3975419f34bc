#include "spba/surrogate_glm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "spba/numeric.hpp"

namespace spba {

BasisSpec BasisSpec::polynomial(int degree) {
  if (degree < 1) throw std::invalid_argument("polynomial basis: degree >= 1");
  BasisSpec s;
  s.kind = Kind::polynomial;
  s.degree = degree;
  s.penalty = PenaltyKind::none;
  return s;
}

BasisSpec BasisSpec::kernel(std::vector<double> centers, double scale) {
  if (centers.empty() || scale <= 0.0)
    throw std::invalid_argument("kernel basis: need centers and scale > 0");
  BasisSpec s;
  s.kind = Kind::kernel;
  s.centers = std::move(centers);
  s.scale = scale;
  s.penalty = PenaltyKind::rkhs_norm;
  return s;
}

BasisSpec BasisSpec::spline(std::vector<double> knots) {
  if (knots.size() < 3) throw std::invalid_argument("spline basis: need >= 3 knots");
  if (!std::is_sorted(knots.begin(), knots.end()))
    throw std::invalid_argument("spline basis: knots must be increasing");
  BasisSpec s;
  s.kind = Kind::spline;
  s.knots = std::move(knots);
  s.penalty = PenaltyKind::curvature;
  return s;
}

int BasisSpec::dim() const {
  switch (kind) {
    case Kind::polynomial: return degree + 1;
    case Kind::kernel: return static_cast<int>(centers.size());
    case Kind::spline: return static_cast<int>(knots.size());
  }
  return 0;
}

Eigen::VectorXd klr_basis(double x, const std::vector<double>& centers, double l) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(centers.size()));
  for (std::size_t j = 0; j < centers.size(); ++j) {
    const double d = x - centers[j];
    v[static_cast<Eigen::Index>(j)] = std::exp(-d * d / (l * l));
  }
  return v;
}

namespace {

inline double pos_cube(double v) { return v > 0.0 ? v * v * v : 0.0; }

// d_j(x) of the natural-spline reduction (1-based j against knots xi).
double spline_d(double x, const std::vector<double>& xi, std::size_t j) {
  const double last = xi.back();
  return (pos_cube(x - xi[j]) - pos_cube(x - last)) / (last - xi[j]);
}

inline double pos_lin(double v) { return v > 0.0 ? v : 0.0; }

// second derivative of d_j
double spline_d2(double x, const std::vector<double>& xi, std::size_t j) {
  const double last = xi.back();
  return 6.0 * (pos_lin(x - xi[j]) - pos_lin(x - last)) / (last - xi[j]);
}

}  // namespace

Eigen::VectorXd spline_basis(double x, const std::vector<double>& knots) {
  const std::size_t p = knots.size();
  Eigen::VectorXd v(static_cast<Eigen::Index>(p));
  v[0] = 1.0;
  v[1] = x;
  const double dlast = spline_d(x, knots, p - 2);
  for (std::size_t j = 0; j + 2 < p; ++j)
    v[static_cast<Eigen::Index>(j + 2)] = spline_d(x, knots, j) - dlast;
  return v;
}

Eigen::VectorXd BasisSpec::features(double x) const {
  switch (kind) {
    case Kind::polynomial: {
      // standardize to [-1, 1] for conditioning
      const double z = 2.0 * x - 1.0;
      Eigen::VectorXd v(degree + 1);
      double zp = 1.0;
      for (int j = 0; j <= degree; ++j) {
        v[j] = zp;
        zp *= z;
      }
      return v;
    }
    case Kind::kernel: return klr_basis(x, centers, scale);
    case Kind::spline: return spline_basis(x, knots);
  }
  return {};
}

Eigen::MatrixXd BasisSpec::penalty_matrix() const {
  const int p = dim();
  switch (penalty) {
    case PenaltyKind::none: return Eigen::MatrixXd::Zero(p, p);
    case PenaltyKind::rkhs_norm: {
      // Gram matrix of the kernel at its centers
      Eigen::MatrixXd j(p, p);
      for (int r = 0; r < p; ++r) {
        const Eigen::VectorXd row = klr_basis(centers[static_cast<std::size_t>(r)], centers, scale);
        j.row(r) = row.transpose();
      }
      return 0.5 * (j + j.transpose());
    }
    case PenaltyKind::curvature: {
      // exact \int phi_i'' phi_j'' over [xi_1, xi_p]: the second derivatives
      // are piecewise linear, so per-interval Simpson is exact
      Eigen::MatrixXd j = Eigen::MatrixXd::Zero(p, p);
      auto d2 = [&](int idx, double x) -> double {
        if (idx < 2) return 0.0;
        return spline_d2(x, knots, static_cast<std::size_t>(idx - 2)) -
               spline_d2(x, knots, knots.size() - 2);
      };
      for (std::size_t seg = 0; seg + 1 < knots.size(); ++seg) {
        const double a = knots[seg], b = knots[seg + 1];
        const double m = 0.5 * (a + b), h = b - a;
        for (int r = 2; r < p; ++r) {
          for (int c = 2; c <= r; ++c) {
            const double v = h / 6.0 *
                             (d2(r, a) * d2(c, a) + 4.0 * d2(r, m) * d2(c, m) +
                              d2(r, b) * d2(c, b));
            j(r, c) += v;
            if (r != c) j(c, r) += v;
          }
        }
      }
      return j;
    }
  }
  return Eigen::MatrixXd::Zero(p, p);
}

double GlmFit::predict_theta(double x) const {
  double th = logistic(predict_phi(x));
  // keep predictions strictly inside (0,1)
  return std::min(std::max(th, 1e-12), 1.0 - 1e-12);
}

double GlmFit::loglik(const Dataset& d) const {
  double ll = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double eta = predict_phi(d.x[i]);
    // B*eta - a*log(1+e^eta), softplus computed stably
    const double softplus = eta > 0.0 ? eta + std::log1p(std::exp(-eta))
                                      : std::log1p(std::exp(eta));
    ll += log_choose(d.a[i], d.b[i]) + d.b[i] * eta - d.a[i] * softplus;
  }
  return ll;
}

double GlmFit::deviance(const Dataset& d) const {
  double dev = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double th = predict_theta(d.x[i]);
    const double bi = d.b[i], ai = d.a[i];
    if (bi > 0.0) dev += 2.0 * bi * std::log(bi / (ai * th));
    if (ai - bi > 0.0) dev += 2.0 * (ai - bi) * std::log((ai - bi) / (ai * (1.0 - th)));
  }
  return dev;
}

double GlmFit::hat_trace(const Dataset& d) const {
  const int p = basis.dim();
  const Eigen::Index n = static_cast<Eigen::Index>(d.size());
  Eigen::MatrixXd phi(n, p);
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::size_t s = static_cast<std::size_t>(i);
    phi.row(i) = basis.features(d.x[s]).transpose();
    const double th = logistic(predict_phi(d.x[s]));
    w[i] = d.a[s] * th * (1.0 - th);
  }
  const Eigen::MatrixXd m = phi.transpose() * w.asDiagonal() * phi;
  Eigen::MatrixXd h = m + lambda * penalty;
  // same stabilizing ridge as the Newton solve; the Gram penalty can be
  // numerically rank deficient
  h.diagonal().array() += 1e-10 * (1.0 + h.diagonal().maxCoeff());
  // tr H = tr[(Phi'W Phi + lambda J)^{-1} Phi' W Phi]
  return h.ldlt().solve(m).trace();
}

GlmFit fit_glm(const Dataset& data, const BasisSpec& basis, double lambda) {
  if (data.empty()) throw std::invalid_argument("fit_glm: empty dataset");
  const int p = basis.dim();
  const Eigen::Index n = static_cast<Eigen::Index>(data.size());

  GlmFit fit;
  fit.basis = basis;
  fit.lambda = lambda;
  fit.penalty = basis.penalty_matrix();
  fit.beta = Eigen::VectorXd::Zero(p);

  Eigen::MatrixXd phi(n, p);
  Eigen::VectorXd av(n), bv(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::size_t s = static_cast<std::size_t>(i);
    phi.row(i) = basis.features(data.x[s]).transpose();
    av[i] = data.a[s];
    bv[i] = data.b[s];
  }

  auto objective = [&](const Eigen::VectorXd& beta) {
    const Eigen::VectorXd eta = phi * beta;
    double obj = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double softplus = eta[i] > 0.0 ? eta[i] + std::log1p(std::exp(-eta[i]))
                                           : std::log1p(std::exp(eta[i]));
      obj += -bv[i] * eta[i] + av[i] * softplus;  // negative loglik
    }
    return obj + 0.5 * lambda * beta.dot(fit.penalty * beta);
  };

  double obj = objective(fit.beta);
  bool converged = false;
  for (int iter = 0; iter < 200; ++iter) {
    const Eigen::VectorXd eta = phi * fit.beta;
    Eigen::VectorXd mu(n), w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double th = logistic(eta[i]);
      mu[i] = av[i] * th;
      w[i] = av[i] * th * (1.0 - th);
    }
    const Eigen::VectorXd grad = phi.transpose() * (mu - bv) + lambda * fit.penalty * fit.beta;
    if (grad.lpNorm<Eigen::Infinity>() <= 1e-6) {
      converged = true;
      break;
    }
    Eigen::MatrixXd hess = phi.transpose() * w.asDiagonal() * phi + lambda * fit.penalty;
    // small ridge stabilizes near-separation solves without changing the optimum check
    hess.diagonal().array() += 1e-10;
    const Eigen::VectorXd step = hess.ldlt().solve(grad);

    double t = 1.0;
    Eigen::VectorXd cand = fit.beta - step;
    double cand_obj = objective(cand);
    int halvings = 0;
    while (cand_obj > obj && halvings < 20) {
      t *= 0.5;
      cand = fit.beta - t * step;
      cand_obj = objective(cand);
      ++halvings;
    }
    if (cand_obj > obj) break;  // no descent direction left
    fit.beta = cand;
    obj = cand_obj;
  }
  fit.diverged = !converged;
  if (converged) {
    // quasi-separation: the gradient can vanish with every fitted probability
    // saturated at 0/1, where the MLE does not exist
    const Eigen::VectorXd eta = phi * fit.beta;
    bool all_saturated = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double th = logistic(eta[i]);
      if (std::min(th, 1.0 - th) > 1e-5) {
        all_saturated = false;
        break;
      }
    }
    if (all_saturated) fit.diverged = true;
  }
  return fit;
}

std::vector<double> default_gcv_grid() {
  std::vector<double> grid(25);
  const double lo = std::log(1e-6), hi = std::log(1e2);
  for (int i = 0; i < 25; ++i) grid[static_cast<std::size_t>(i)] = std::exp(lo + i * (hi - lo) / 24.0);
  return grid;
}

double gcv_lambda(const Dataset& data, const BasisSpec& basis,
                  const std::vector<double>& grid) {
  const double n = static_cast<double>(data.size());
  double best_lambda = grid.front();
  double best_gcv = std::numeric_limits<double>::infinity();
  bool any = false;
  for (double lam : grid) {
    const GlmFit fit = fit_glm(data, basis, lam);
    if (fit.diverged) continue;
    const double tr = fit.hat_trace(data);
    const double denom = n - tr;
    if (denom <= 0.0) continue;
    const double gcv = n * fit.deviance(data) / (denom * denom);
    if (std::isfinite(gcv) && gcv < best_gcv) {
      best_gcv = gcv;
      best_lambda = lam;
      any = true;
    }
  }
  if (!any) throw std::runtime_error("gcv_lambda: no grid point produced a stable fit");
  return best_lambda;
}

int aic_degree(const Dataset& data, int max_degree) {
  int best_deg = 1;
  double best_aic = std::numeric_limits<double>::infinity();
  for (int d = 1; d <= max_degree; ++d) {
    const GlmFit fit = fit_glm(data, BasisSpec::polynomial(d), 0.0);
    if (fit.diverged) continue;
    const double aic = -2.0 * fit.loglik(data) + 2.0 * (d + 1);
    if (aic < best_aic) {  // strict: ties keep the smaller degree
      best_aic = aic;
      best_deg = d;
    }
  }
  return best_deg;
}

}  // namespace spba
