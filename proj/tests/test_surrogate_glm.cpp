#include <doctest.h>

#include <cmath>
#include <random>

#include "spba/numeric.hpp"
#include "spba/oracles.hpp"
#include "spba/surrogate.hpp"
#include "spba/surrogate_glm.hpp"

using namespace spba;

namespace {

// binomial draws from a known logistic curve
Dataset logistic_dataset(const std::function<double(double)>& eta, int n_sites,
                         int a, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Dataset d;
  for (int i = 1; i <= n_sites; ++i) {
    const double x = static_cast<double>(i) / (n_sites + 1);
    const double th = logistic(eta(x));
    int b = 0;
    for (int k = 0; k < a; ++k)
      if (u(rng) < th) ++b;
    d.add(x, a, b);
  }
  return d;
}

}  // namespace

TEST_CASE("feature maps") {
  const BasisSpec poly = BasisSpec::polynomial(3);
  CHECK(poly.dim() == 4);
  const Eigen::VectorXd v = poly.features(0.75);  // z = 0.5
  CHECK(v[0] == doctest::Approx(1.0));
  CHECK(v[1] == doctest::Approx(0.5));
  CHECK(v[2] == doctest::Approx(0.25));
  CHECK(v[3] == doctest::Approx(0.125));

  const Eigen::VectorXd k = klr_basis(0.0, {1.0, 0.5}, 1.0);
  CHECK(k[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(k[1] == doctest::Approx(std::exp(-0.25)).epsilon(1e-12));

  const std::vector<double> knots = {0.1, 0.3, 0.5, 0.7, 0.9};
  const BasisSpec spline = BasisSpec::spline(knots);
  CHECK(spline.dim() == 5);
  const Eigen::VectorXd s = spline.features(0.42);
  CHECK(s[0] == doctest::Approx(1.0));
  CHECK(s[1] == doctest::Approx(0.42));
}

TEST_CASE("spline basis is natural: linear outside the boundary knots") {
  const std::vector<double> knots = {0.2, 0.4, 0.6, 0.8};
  const BasisSpec spline = BasisSpec::spline(knots);
  // second differences vanish to the left of the first knot and to the
  // right of the last knot
  for (double x0 : {0.0, 0.05, 0.85, 0.95}) {
    const double h = 0.01;
    const Eigen::VectorXd second = spline.features(x0 + h) -
                                   2 * spline.features(x0) +
                                   spline.features(x0 - h);
    for (int j = 0; j < spline.dim(); ++j)
      CHECK(std::abs(second[j]) <= 1e-9);
  }
}

TEST_CASE("curvature penalty matrix matches numeric integration") {
  const std::vector<double> knots = {0.1, 0.35, 0.55, 0.8};
  const BasisSpec spline = BasisSpec::spline(knots);
  const Eigen::MatrixXd j = spline.penalty_matrix();
  const int p = spline.dim();
  // rows/cols of the linear part are zero
  for (int c = 0; c < p; ++c) {
    CHECK(j(0, c) == 0.0);
    CHECK(j(1, c) == 0.0);
  }
  // numeric oracle: finite-difference second derivatives on a fine grid
  const int grid = 20000;
  const double lo = knots.front(), hi = knots.back(), dx = (hi - lo) / grid;
  Eigen::MatrixXd num = Eigen::MatrixXd::Zero(p, p);
  for (int i = 1; i < grid; ++i) {
    const double x = lo + i * dx;
    const Eigen::VectorXd d2 =
        (spline.features(x + dx) - 2 * spline.features(x) +
         spline.features(x - dx)) /
        (dx * dx);
    num += d2 * d2.transpose() * dx;
  }
  for (int r = 2; r < p; ++r)
    for (int c = 2; c < p; ++c)
      CHECK(j(r, c) == doctest::Approx(num(r, c)).epsilon(5e-3));
}

TEST_CASE("rkhs penalty is the kernel gram matrix") {
  const std::vector<double> centers = {0.2, 0.5, 0.9};
  const BasisSpec k = BasisSpec::kernel(centers, 1.0);
  const Eigen::MatrixXd j = k.penalty_matrix();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      const double d = centers[static_cast<std::size_t>(r)] -
                       centers[static_cast<std::size_t>(c)];
      CHECK(j(r, c) == doctest::Approx(std::exp(-d * d)).epsilon(1e-12));
    }
}

TEST_CASE("unpenalized fit recovers a known logit line") {
  // eta(x) = -z with z = 2x - 1, i.e. beta = (0, -1)
  const Dataset d = logistic_dataset([](double x) { return 1.0 - 2.0 * x; },
                                     15, 4000, 31);
  const GlmFit fit = fit_glm(d, BasisSpec::polynomial(1), 0.0);
  REQUIRE_FALSE(fit.diverged);
  CHECK(std::abs(fit.beta[0]) < 0.05);
  CHECK(fit.beta[1] == doctest::Approx(-1.0).epsilon(0.05));
  CHECK(fit.predict_theta(0.5) == doctest::Approx(0.5).epsilon(0.02));
  CHECK(fit.deviance(d) >= 0.0);
}

TEST_CASE("separation is flagged as divergence") {
  Dataset d;
  d.add(0.2, 10, 0);
  d.add(0.4, 10, 0);
  d.add(0.6, 10, 10);
  d.add(0.8, 10, 10);
  const GlmFit fit = fit_glm(d, BasisSpec::polynomial(1), 0.0);
  CHECK(fit.diverged);
  // a ridge penalty restores convergence
  const GlmFit pen = fit_glm(d, BasisSpec::polynomial(1),
                             1e-2);
  (void)pen;  // no penalty matrix for polynomials; divergence persists
  const GlmFit klr = fit_glm(d, BasisSpec::kernel(d.x, 1.0), 0.01);
  CHECK_FALSE(klr.diverged);
}

TEST_CASE("gcv selects a grid member and hat trace is sane") {
  const Dataset d = logistic_dataset([](double x) { return 2.0 - 6.0 * x; },
                                     20, 200, 32);
  const BasisSpec basis = BasisSpec::kernel(d.x, 1.0);
  const auto grid = default_gcv_grid();
  REQUIRE(grid.size() == 25);
  CHECK(grid.front() == doctest::Approx(1e-6));
  CHECK(grid.back() == doctest::Approx(1e2));
  const double lam = gcv_lambda(d, basis, grid);
  CHECK(std::find_if(grid.begin(), grid.end(), [&](double g) {
          return std::abs(g - lam) < 1e-12 * g;
        }) != grid.end());
  const GlmFit fit = fit_glm(d, basis, lam);
  const double tr = fit.hat_trace(d);
  CHECK(tr > 0.0);
  CHECK(tr <= basis.dim() + 1e-9);
}

TEST_CASE("aic degree selection") {
  const Dataset lin = logistic_dataset([](double x) { return 1.5 - 3.0 * x; },
                                       25, 500, 33);
  const int d_lin = aic_degree(lin, 5);
  CHECK(d_lin >= 1);
  CHECK(d_lin <= 2);
  // strongly cubic logit needs degree >= 3
  const Dataset cub = logistic_dataset(
      [](double x) {
        const double z = 2.0 * x - 1.0;
        return 4.0 * z * z * z;
      },
      25, 500, 34);
  CHECK(aic_degree(cub, 5) >= 3);
}

TEST_CASE("surrogate adapters track the true curve") {
  const SyntheticOracle o(SyntheticOracle::Kind::linear, 0.35);
  std::mt19937_64 rng(35);
  Dataset d;
  for (int i = 1; i <= 20; ++i) {
    const double x = static_cast<double>(i) / 21;
    d.add(x, 250, o.query_batch(x, 250, rng).b);
  }
  for (const char* kind : {"lr", "klr", "slr", "bgp"}) {
    auto s = make_surrogate(kind);
    s->fit(d);
    double worst = 0.0;
    for (double x = 0.1; x < 0.95; x += 0.05)
      worst = std::max(worst, std::abs(s->predict_theta(x) - o.true_theta(x)));
    INFO(kind);
    CHECK(worst < 0.15);
    CHECK((std::string(kind) == "bgp") == (s->gp() != nullptr));
  }
  CHECK_THROWS_AS(make_surrogate("nope"), std::invalid_argument);
}
