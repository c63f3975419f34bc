#include "spba/surrogate.hpp"

#include <algorithm>
#include <stdexcept>

namespace spba {

void LrSurrogate::fit(const Dataset& data) {
  GlmFit f = fit_glm(data, BasisSpec::polynomial(degree_), 0.0);
  // under perfect separation back off to lower degrees rather than abort
  int deg = degree_;
  while (f.diverged && deg > 1) f = fit_glm(data, BasisSpec::polynomial(--deg), 0.0);
  if (f.diverged) throw std::runtime_error("LR fit diverged at every degree");
  fit_ = std::move(f);
}

double LrSurrogate::predict_theta(double x) const {
  if (!fit_) throw std::logic_error("LR surrogate not fitted");
  return fit_->predict_theta(x);
}

void KlrSurrogate::fit(const Dataset& data) {
  GlmFit f = fit_glm(data, BasisSpec::kernel(data.x, scale_), lambda_);
  if (f.diverged) throw std::runtime_error("KLR fit diverged");
  fit_ = std::move(f);
}

double KlrSurrogate::predict_theta(double x) const {
  if (!fit_) throw std::logic_error("KLR surrogate not fitted");
  return fit_->predict_theta(x);
}

namespace {

std::vector<double> quantile_knots(const Dataset& data, std::size_t max_knots) {
  std::vector<double> xs = data.x;
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  if (xs.size() <= max_knots) return xs;
  std::vector<double> knots(max_knots);
  for (std::size_t j = 0; j < max_knots; ++j) {
    const double q = static_cast<double>(j) / (max_knots - 1);
    knots[j] = xs[static_cast<std::size_t>(q * (xs.size() - 1) + 0.5)];
  }
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  return knots;
}

}  // namespace

void SlrSurrogate::fit(const Dataset& data) {
  const BasisSpec basis = BasisSpec::spline(quantile_knots(data, 30));
  const double lambda = gcv_lambda(data, basis, default_gcv_grid());
  GlmFit f = fit_glm(data, basis, lambda);
  if (f.diverged) throw std::runtime_error("SLR fit diverged");
  fit_ = std::move(f);
}

double SlrSurrogate::predict_theta(double x) const {
  if (!fit_) throw std::logic_error("SLR surrogate not fitted");
  return fit_->predict_theta(x);
}

void GpSurrogate::fit(const Dataset& data) {
  const bool full_search =
      !hyper_ || (hyper_refit_every_ > 0 && fit_count_ % hyper_refit_every_ == 0);
  if (full_search) {
    const MapResult r = map_hyperparams(data, priors_, hyper_);
    hyper_ = r.hyper;
  }
  fit_.emplace(data, *hyper_);
  ++fit_count_;
}

double GpSurrogate::predict_theta(double x) const {
  if (!fit_) throw std::logic_error("GP surrogate not fitted");
  return fit_->predict_theta(x);
}

std::unique_ptr<Surrogate> make_surrogate(const std::string& kind,
                                          int hyper_refit_every) {
  if (kind == "lr") return std::make_unique<LrSurrogate>();
  if (kind == "klr") return std::make_unique<KlrSurrogate>();
  if (kind == "slr") return std::make_unique<SlrSurrogate>();
  if (kind == "bgp") return std::make_unique<GpSurrogate>(HyperPriors{}, hyper_refit_every);
  throw std::invalid_argument("unknown surrogate kind: " + kind);
}

}  // namespace spba
