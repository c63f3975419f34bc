#include "spba/surrogate_gp.hpp"

#include <cmath>
#include <stdexcept>

#include "spba/numeric.hpp"

namespace spba {

namespace {

double binom_loglik(const Dataset& d, const Eigen::VectorXd& phi) {
  double ll = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double th = logistic(phi[static_cast<Eigen::Index>(i)]);
    ll += log_choose(d.a[i], d.b[i]) + d.b[i] * std::log(th) +
          (d.a[i] - d.b[i]) * std::log1p(-th);
  }
  return ll;
}

Eigen::MatrixXd kernel_matrix(const Dataset& d, const MaternHyper& hyper) {
  const Eigen::Index n = static_cast<Eigen::Index>(d.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j)
      k(i, j) = k(j, i) = matern52(hyper, d.x[static_cast<std::size_t>(i)],
                                   d.x[static_cast<std::size_t>(j)]);
  return k;
}

}  // namespace

double matern52(const MaternHyper& hyper, double x1, double x2) {
  const double r = std::abs(x1 - x2);
  const double s = std::sqrt(5.0) * r / hyper.ell;
  return hyper.tau2 * (1.0 + s + s * s / 3.0) * std::exp(-s);
}

LatentGpFit::LatentGpFit(Dataset data, MaternHyper hyper)
    : data_(std::move(data)), hyper_(hyper) {
  if (data_.empty()) throw std::invalid_argument("LatentGpFit: empty dataset");
  const Eigen::Index n = static_cast<Eigen::Index>(data_.size());

  // Jittered kernel matrix; escalate jitter x10 on factorization failure.
  Eigen::LLT<Eigen::MatrixXd> kllt;
  double jitter = 1e-8 * hyper_.tau2;
  const double max_jitter = 1e-4 * hyper_.tau2;
  for (;;) {
    k_ = kernel_matrix(data_, hyper_);
    k_.diagonal().array() += jitter;
    kllt.compute(k_);
    if (kllt.info() == Eigen::Success) break;
    jitter *= 10.0;
    if (jitter > max_jitter)
      throw std::runtime_error("LatentGpFit: kernel matrix not PD after maximal jitter");
  }

  Eigen::VectorXd av(n), bv(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    av[i] = data_.a[static_cast<std::size_t>(i)];
    bv[i] = data_.b[static_cast<std::size_t>(i)];
  }

  auto objective = [&](const Eigen::VectorXd& phi) {
    return binom_loglik(data_, phi) - 0.5 * phi.dot(kllt.solve(phi));
  };

  Eigen::VectorXd phi = Eigen::VectorXd::Zero(n);
  double obj = objective(phi);
  Eigen::LLT<Eigen::MatrixXd> bllt;
  bool converged = false;
  for (int iter = 0; iter < 100; ++iter) {
    const Eigen::VectorXd theta = phi.unaryExpr([](double v) { return logistic(v); });
    const Eigen::VectorXd w = av.array() * theta.array() * (1.0 - theta.array());
    const Eigen::VectorXd u = bv - av.cwiseProduct(theta);

    if ((phi - k_ * u).lpNorm<Eigen::Infinity>() <= 1e-8) {
      converged = true;
      break;
    }

    // Stable Newton step through B = I + W^{1/2} K W^{1/2}.
    const Eigen::VectorXd sw = w.cwiseSqrt();
    Eigen::MatrixXd bm = sw.asDiagonal() * k_ * sw.asDiagonal();
    bm.diagonal().array() += 1.0;
    bllt.compute(bm);
    if (bllt.info() != Eigen::Success)
      throw std::runtime_error("LatentGpFit: Newton inner factorization failed");
    const Eigen::VectorXd rhs = w.cwiseProduct(phi) + u;
    const Eigen::VectorXd step_alpha = rhs - sw.cwiseProduct(bllt.solve(sw.cwiseProduct(k_ * rhs)));
    const Eigen::VectorXd phi_new = k_ * step_alpha;

    // step-halving if the full Newton step overshoots
    double t = 1.0;
    Eigen::VectorXd cand = phi_new;
    double cand_obj = objective(cand);
    for (int h = 0; h < 30 && cand_obj < obj; ++h) {
      t *= 0.5;
      cand = phi + t * (phi_new - phi);
      cand_obj = objective(cand);
    }
    const double delta = cand_obj - obj;
    phi = cand;
    obj = cand_obj;
    if (std::abs(delta) <= 1e-10) {
      converged = true;  // objective stalled
      break;
    }
  }
  if (!converged) throw std::runtime_error("LatentGpFit: Newton did not converge");

  mode_ = phi;
  const Eigen::VectorXd theta = mode_.unaryExpr([](double v) { return logistic(v); });
  w_ = av.array() * theta.array() * (1.0 - theta.array());
  alpha_ = kllt.solve(mode_);

  Eigen::MatrixXd vc = k_;
  vc.diagonal() += w_.cwiseInverse();
  vcov_.compute(vc);
  if (vcov_.info() != Eigen::Success)
    throw std::runtime_error("LatentGpFit: K + W^{-1} not PD");

  const Eigen::VectorXd sw = w_.cwiseSqrt();
  Eigen::MatrixXd bm = sw.asDiagonal() * k_ * sw.asDiagonal();
  bm.diagonal().array() += 1.0;
  bllt.compute(bm);
  double logdet_b = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) logdet_b += 2.0 * std::log(bllt.matrixL()(i, i));
  log_marginal_ = binom_loglik(data_, mode_) - 0.5 * mode_.dot(alpha_) - 0.5 * logdet_b;
}

double LatentGpFit::stationarity_residual() const {
  const Eigen::Index n = mode_.size();
  Eigen::VectorXd u(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::size_t s = static_cast<std::size_t>(i);
    u[i] = data_.b[s] - data_.a[s] * logistic(mode_[i]);
  }
  return (mode_ - k_ * u).lpNorm<Eigen::Infinity>();
}

Eigen::VectorXd LatentGpFit::kernel_vec(double x) const {
  const Eigen::Index n = static_cast<Eigen::Index>(data_.size());
  Eigen::VectorXd k(n);
  for (Eigen::Index i = 0; i < n; ++i)
    k[i] = matern52(hyper_, x, data_.x[static_cast<std::size_t>(i)]);
  return k;
}

std::pair<double, double> LatentGpFit::predict_latent(double x) const {
  const Eigen::VectorXd kv = kernel_vec(x);
  const double mean = kv.dot(alpha_);
  double var = hyper_.tau2 - kv.dot(vcov_.solve(kv));
  var = std::max(var, 1e-15 * hyper_.tau2);
  return {mean, var};
}

double logistic_gauss_mean(double m, double s2) {
  const double s = std::sqrt(s2);
  const auto& gh = gauss_hermite(100);
  double acc = 0.0;
  for (std::size_t i = 0; i < gh.nodes.size(); ++i)
    acc += gh.weights[i] * logistic(m + std::sqrt(2.0) * s * gh.nodes[i]);
  return acc / std::sqrt(M_PI);
}

double LatentGpFit::predict_theta(double x) const {
  const auto [m, v] = predict_latent(x);
  return logistic_gauss_mean(m, v);
}

namespace {

double log_hyperprior(const MaternHyper& hyper, const HyperPriors& priors) {
  // Student-t on ell plus the (log tau^2, log ell) change-of-variable terms;
  // improper uniform on sqrt(tau2).
  const double z = hyper.ell / priors.t_scale;
  const double lp_ell = -0.5 * (priors.t_dof + 1.0) * std::log1p(z * z / priors.t_dof);
  return lp_ell + std::log(hyper.ell) + 0.5 * std::log(hyper.tau2);
}

MaternHyper from_log(const std::vector<double>& z) {
  return {std::exp(z[0]), std::exp(z[1])};
}

}  // namespace

MapResult map_hyperparams(const Dataset& data, const HyperPriors& priors,
                          std::optional<MaternHyper> warm_start, int restarts,
                          int max_outer) {
  if (data.size() < 2) throw std::invalid_argument("map_hyperparams: need >= 2 sites");

  std::vector<std::vector<double>> starts;
  if (warm_start) {
    starts.push_back({std::log(warm_start->tau2), std::log(warm_start->ell)});
  } else {
    // Latin square over [log 1e-2, log 1e2]^2
    const double lo = std::log(1e-2), hi = std::log(1e2);
    static const int perm[] = {2, 0, 3, 1, 4};
    for (int i = 0; i < restarts; ++i) {
      const double u = lo + (i + 0.5) / restarts * (hi - lo);
      const double v = lo + (perm[i % 5] + 0.5) / restarts * (hi - lo);
      starts.push_back({u, v});
    }
  }

  MapResult best;
  double best_obj = -std::numeric_limits<double>::infinity();
  bool any_ok = false;

  for (const auto& start : starts) {
    MaternHyper cur = from_log(start);
    bool ok = false;
    try {
      for (int round = 0; round < max_outer; ++round) {
        LatentGpFit fit(data, cur);
        const Eigen::VectorXd phi = fit.mode();
        const Eigen::VectorXd w = fit.hessian_diag();
        const double ll_const = binom_loglik(data, phi);

        auto inner = [&](const std::vector<double>& z) -> double {
          if (std::abs(z[0]) > 15.0 || std::abs(z[1]) > 15.0) return -1e100;
          const MaternHyper h = from_log(z);
          Eigen::MatrixXd k = kernel_matrix(data, h);
          k.diagonal().array() += 1e-8 * h.tau2;
          Eigen::LLT<Eigen::MatrixXd> llt(k);
          if (llt.info() != Eigen::Success) return -1e100;
          const Eigen::VectorXd sw = w.cwiseSqrt();
          Eigen::MatrixXd bm = sw.asDiagonal() * k * sw.asDiagonal();
          bm.diagonal().array() += 1.0;
          Eigen::LLT<Eigen::MatrixXd> bllt(bm);
          if (bllt.info() != Eigen::Success) return -1e100;
          double logdet_b = 0.0;
          for (Eigen::Index i = 0; i < bm.rows(); ++i)
            logdet_b += 2.0 * std::log(bllt.matrixL()(i, i));
          return ll_const - 0.5 * phi.dot(llt.solve(phi)) - 0.5 * logdet_b +
                 log_hyperprior(h, priors);
        };

        const std::vector<double> znew = nelder_mead_max(
            inner, {std::log(cur.tau2), std::log(cur.ell)}, 0.3, 80, 1e-7);
        const MaternHyper next = from_log(znew);
        const double rel = std::max(std::abs(next.tau2 - cur.tau2) / cur.tau2,
                                    std::abs(next.ell - cur.ell) / cur.ell);
        cur = next;
        if (rel <= 1e-4) {
          ok = true;
          break;
        }
      }
      LatentGpFit final_fit(data, cur);
      const double obj = final_fit.log_marginal() + log_hyperprior(cur, priors);
      if (obj > best_obj) {
        best_obj = obj;
        best.hyper = cur;
        best.converged = ok;
      }
      any_ok = true;
    } catch (const std::exception&) {
      continue;  // non-PD start; other restarts may succeed
    }
  }
  if (!any_ok) {
    best.hyper = warm_start ? *warm_start : MaternHyper{};
    best.converged = false;
  }
  return best;
}

double lookahead_variance(const LatentGpFit& fit, double x, double a_new) {
  const double s2 = fit.predict_latent(x).second;
  if (a_new <= 0.0) return s2;
  const double th = fit.predict_theta(x);
  return 1.0 / (1.0 / s2 + a_new * th * (1.0 - th));
}

int adaptive_batch(const LatentGpFit& fit, double x, double nu, int a0_nu, int cap) {
  if (nu <= 0.0 || a0_nu < 1 || cap < a0_nu)
    throw std::invalid_argument("adaptive_batch: invalid parameters");
  const double s2 = fit.predict_latent(x).second;
  if (s2 < nu) return a0_nu;
  const double th = fit.predict_theta(x);
  const double raw = (1.0 / (th * (1.0 - th))) * (1.0 / nu - 1.0 / s2);
  const int n = static_cast<int>(std::ceil(raw));
  return std::min(std::max(n, a0_nu), cap);
}

}  // namespace spba
