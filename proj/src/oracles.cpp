#include "spba/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "spba/numeric.hpp"

namespace spba {

double Oracle::true_accuracy(double x) const {
  const double th = true_theta(x);
  return std::max(th, 1.0 - th);
}

SyntheticOracle::SyntheticOracle(Kind kind, double x_star) : kind_(kind), x_star_(x_star) {
  if (x_star <= 0.0 || x_star >= 1.0)
    throw std::invalid_argument("SyntheticOracle: x_star outside (0,1)");
}

SyntheticOracle::Kind SyntheticOracle::kind_from_string(const std::string& s) {
  if (s == "linear") return Kind::linear;
  if (s == "exponential") return Kind::exponential;
  if (s == "cubic") return Kind::cubic;
  throw std::invalid_argument("unknown synthetic oracle kind: " + s);
}

double SyntheticOracle::h(double x) const {
  switch (kind_) {
    case Kind::linear: return x_star_ - x;
    case Kind::exponential: return std::exp(2.0 * (x_star_ - x)) - 1.0;
    case Kind::cubic: {
      const double d = x_star_ - x;
      return d * d * d;
    }
  }
  return 0.0;
}

double SyntheticOracle::sigma(double x) const {
  switch (kind_) {
    case Kind::linear: return 0.2;
    case Kind::exponential: return x < x_star_ ? 0.2 : 1.0;
    case Kind::cubic: return 0.025;
  }
  return 1.0;
}

double SyntheticOracle::true_theta(double x) const {
  return norm_cdf(h(x) / sigma(x));
}

BatchResponse SyntheticOracle::query_batch(double x, int a, std::mt19937_64& rng) const {
  if (x < domain_lo() || x > domain_hi())
    throw std::invalid_argument("query_batch: x outside oracle domain");
  if (a < 1) throw std::invalid_argument("query_batch: a must be >= 1");
  const double hx = h(x);
  const double sx = sigma(x);
  std::normal_distribution<double> noise(0.0, 1.0);
  int b = 0;
  for (int i = 0; i < a; ++i) {
    if (hx + sx * noise(rng) > 0.0) ++b;
  }
  return {x, a, b};
}

BermudanOracle::BermudanOracle(Params params, BoundaryTable boundary)
    : params_(params), boundary_(std::move(boundary)) {
  const int k_eval = steps_from(params_.t_eval);
  const int k_mat = steps_from(params_.maturity);
  const int needed = k_mat - k_eval - 1;
  if (static_cast<int>(boundary_.size()) < needed)
    throw std::invalid_argument("BermudanOracle: boundary table missing exercise dates");
  std::sort(boundary_.begin(), boundary_.end());
}

int BermudanOracle::steps_from(double t) const {
  return static_cast<int>(std::lround(t / params_.dt));
}

double BermudanOracle::payoff(double t, double x) const {
  return std::exp(-params_.rate * t) * std::max(params_.strike - x, 0.0);
}

double BermudanOracle::raw_path_value(double x, std::mt19937_64& rng) const {
  const int k_eval = steps_from(params_.t_eval);
  const int k_mat = steps_from(params_.maturity);
  const double drift = (params_.rate - 0.5 * params_.vol * params_.vol) * params_.dt;
  const double diff = params_.vol * std::sqrt(params_.dt);
  std::normal_distribution<double> z(0.0, 1.0);

  const double immediate = payoff(params_.t_eval, x);
  double s = x;
  for (int k = k_eval + 1; k < k_mat; ++k) {
    s *= std::exp(drift + diff * z(rng));
    const auto& entry = boundary_[static_cast<std::size_t>(k - k_eval - 1)];
    if (s <= entry.second) return payoff(k * params_.dt, s) - immediate;
  }
  s *= std::exp(drift + diff * z(rng));
  return payoff(params_.maturity, s) - immediate;
}

BatchResponse BermudanOracle::raw_query_batch(double x, int a_signs, std::mt19937_64& rng) const {
  if (x < params_.lo || x > params_.hi)
    throw std::invalid_argument("raw_query_batch: x outside (lo, hi)");
  if (a_signs < 1) throw std::invalid_argument("raw_query_batch: a must be >= 1");
  int b = 0;
  for (int i = 0; i < a_signs; ++i) {
    double sum = 0.0;
    for (int r = 0; r < params_.pre_average; ++r) sum += raw_path_value(x, rng);
    if (sum > 0.0) ++b;
  }
  return {x, a_signs, b};
}

BatchResponse BermudanOracle::query_batch(double x, int a, std::mt19937_64& rng) const {
  BatchResponse raw = raw_query_batch(x, a, rng);
  return {raw.x, raw.a, raw.a - raw.b};  // timing value increases in x
}

BermudanOracle::BoundaryTable BermudanOracle::compute_boundary(const Params& params,
                                                               std::uint64_t seed,
                                                               int paths_coarse,
                                                               int paths_fine) {
  std::mt19937_64 rng(splitmix64(seed));
  const int k_eval = static_cast<int>(std::lround(params.t_eval / params.dt));
  const int k_mat = static_cast<int>(std::lround(params.maturity / params.dt));

  BoundaryTable table;  // filled back to front; holds dates after the current one

  for (int k = k_mat - 1; k > k_eval; --k) {
    Params p = params;
    p.t_eval = k * params.dt;
    BermudanOracle probe_oracle(p, table);

    auto mean_timing = [&](double x, int n) {
      double sum = 0.0;
      for (int i = 0; i < n; ++i) sum += probe_oracle.raw_path_value(x, rng);
      return sum / n;
    };

    // coarse scan: the mean timing value increases in x, so take the last
    // sign change as the bracket
    const int coarse_n = 31;
    double lo = params.lo, hi = params.hi;
    double prev_x = params.lo, prev_m = mean_timing(params.lo, paths_coarse);
    for (int i = 1; i < coarse_n; ++i) {
      const double x = params.lo +
                       (params.hi - params.lo) * i / (coarse_n - 1);
      const double m = mean_timing(x, paths_coarse);
      if (prev_m <= 0.0 && m > 0.0) {
        lo = prev_x;
        hi = x;
      }
      prev_x = x;
      prev_m = m;
    }

    // local linear fit of the mean over a widened fine window -> zero
    const double pad = 0.5 * (hi - lo);
    const double flo = std::max(params.lo, lo - pad);
    const double fhi = std::min(params.hi, hi + pad);
    const int fine_n = 11;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < fine_n; ++i) {
      const double x = flo + (fhi - flo) * i / (fine_n - 1);
      const double m = mean_timing(x, paths_fine);
      sx += x;
      sy += m;
      sxx += x * x;
      sxy += x * m;
    }
    const double slope = (fine_n * sxy - sx * sy) / (fine_n * sxx - sx * sx);
    const double icept = (sy - slope * sx) / fine_n;
    double root = slope > 0.0 ? -icept / slope : 0.5 * (lo + hi);
    root = std::clamp(root, params.lo, params.hi);
    table.insert(table.begin(), {k * params.dt, root});
  }
  return table;
}

void BermudanOracle::write_boundary_csv(const BoundaryTable& table, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << "time,boundary\n";
  os.precision(12);
  for (const auto& [t, b] : table) os << t << ',' << b << '\n';
}

BermudanOracle::BoundaryTable BermudanOracle::read_boundary_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open boundary table " + path);
  BoundaryTable table;
  std::string line;
  std::getline(is, line);  // header
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    double t, b;
    char comma;
    if (ls >> t >> comma >> b) table.push_back({t, b});
  }
  std::sort(table.begin(), table.end());
  return table;
}

}  // namespace spba
