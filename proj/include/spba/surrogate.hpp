#pragma once

#include <memory>
#include <optional>
#include <string>

#include "spba/dataset.hpp"
#include "spba/surrogate_glm.hpp"
#include "spba/surrogate_gp.hpp"

namespace spba {

// Common face of the spatial accuracy models the selection policies consume.
class Surrogate {
 public:
  virtual ~Surrogate() = default;
  virtual void fit(const Dataset& data) = 0;
  virtual double predict_theta(double x) const = 0;
  // Non-null for the binomial GP, which adaptive batching requires.
  virtual const LatentGpFit* gp() const { return nullptr; }
};

// Quintic (by default) logistic regression, unpenalized.
class LrSurrogate : public Surrogate {
 public:
  explicit LrSurrogate(int degree = 5) : degree_(degree) {}
  void fit(const Dataset& data) override;
  double predict_theta(double x) const override;

 private:
  int degree_;
  std::optional<GlmFit> fit_;
};

// Kernel logistic regression, Gaussian radial features centered at the sites.
class KlrSurrogate : public Surrogate {
 public:
  explicit KlrSurrogate(double scale = 1.0, double lambda = 0.01)
      : scale_(scale), lambda_(lambda) {}
  void fit(const Dataset& data) override;
  double predict_theta(double x) const override;

 private:
  double scale_;
  double lambda_;
  std::optional<GlmFit> fit_;
};

// Smoothing-spline logistic regression: natural-cubic basis on quantile
// knots (at most 30), curvature penalty, lambda chosen by GCV at each fit.
class SlrSurrogate : public Surrogate {
 public:
  void fit(const Dataset& data) override;
  double predict_theta(double x) const override;

 private:
  std::optional<GlmFit> fit_;
};

// Binomial GP with MAP hyperparameters. A full hyperparameter search runs on
// the first fit and every hyper_refit_every-th fit after that; in between the
// Laplace mode is refit at the cached hyperparameters.
class GpSurrogate : public Surrogate {
 public:
  explicit GpSurrogate(HyperPriors priors = {}, int hyper_refit_every = 1)
      : priors_(priors), hyper_refit_every_(hyper_refit_every) {}
  void fit(const Dataset& data) override;
  double predict_theta(double x) const override;
  const LatentGpFit* gp() const override { return fit_ ? &*fit_ : nullptr; }

 private:
  HyperPriors priors_;
  int hyper_refit_every_;
  int fit_count_ = 0;
  std::optional<MaternHyper> hyper_;
  std::optional<LatentGpFit> fit_;
};

// Factory for the harness config names: lr, klr, slr, bgp.
std::unique_ptr<Surrogate> make_surrogate(const std::string& kind,
                                          int hyper_refit_every = 1);

}  // namespace spba
