#include "spba/numeric.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <map>
#include <mutex>

namespace spba {

std::pair<double, double> golden_section_max(const std::function<double(double)>& f,
                                             double lo, double hi, double tol) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - (b - a) * invphi;
  double d = a + (b - a) * invphi;
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - (b - a) * invphi;
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + (b - a) * invphi;
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

const GaussHermite& gauss_hermite(int n) {
  static std::map<int, GaussHermite> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  // Jacobi matrix of the Hermite recurrence: off-diagonal sqrt(i/2).
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double off = std::sqrt(i / 2.0);
    J(i, i - 1) = off;
    J(i - 1, i) = off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  GaussHermite gh;
  gh.nodes.resize(n);
  gh.weights.resize(n);
  const double sqrt_pi = std::sqrt(M_PI);
  for (int i = 0; i < n; ++i) {
    gh.nodes[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    gh.weights[i] = sqrt_pi * v0 * v0;
  }
  return cache.emplace(n, std::move(gh)).first->second;
}

std::vector<double> nelder_mead_max(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> start, double step,
                                    int max_evals, double ftol) {
  const int dim = static_cast<int>(start.size());
  struct Vertex {
    std::vector<double> x;
    double val;
  };
  int evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    return f(x);
  };

  std::vector<Vertex> s;
  s.push_back({start, eval(start)});
  for (int i = 0; i < dim; ++i) {
    auto x = start;
    x[i] += step;
    s.push_back({x, eval(x)});
  }
  auto by_val = [](const Vertex& a, const Vertex& b) { return a.val > b.val; };

  while (evals < max_evals) {
    std::sort(s.begin(), s.end(), by_val);
    if (std::abs(s.front().val - s.back().val) < ftol) break;

    std::vector<double> centroid(dim, 0.0);
    for (int i = 0; i < dim; ++i) {
      for (int j = 0; j < dim; ++j) centroid[j] += s[i].x[j];
    }
    for (double& c : centroid) c /= dim;
    const Vertex& worst = s.back();

    auto affine = [&](double t) {
      std::vector<double> x(dim);
      for (int j = 0; j < dim; ++j) x[j] = centroid[j] + t * (centroid[j] - worst.x[j]);
      return x;
    };

    auto xr = affine(1.0);
    const double fr = eval(xr);
    if (fr > s.front().val) {
      auto xe = affine(2.0);
      const double fe = eval(xe);
      if (fe > fr) {
        s.back() = {xe, fe};
      } else {
        s.back() = {xr, fr};
      }
    } else if (fr > s[dim - 1].val) {
      s.back() = {xr, fr};
    } else {
      auto xc = affine(-0.5);
      const double fc = eval(xc);
      if (fc > worst.val) {
        s.back() = {xc, fc};
      } else {
        // shrink toward best
        for (int i = 1; i <= dim; ++i) {
          for (int j = 0; j < dim; ++j) s[i].x[j] = 0.5 * (s[i].x[j] + s[0].x[j]);
          s[i].val = eval(s[i].x);
        }
      }
    }
  }
  std::sort(s.begin(), s.end(), by_val);
  return s.front().x;
}

}  // namespace spba
