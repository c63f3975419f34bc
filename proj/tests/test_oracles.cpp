#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "spba/oracles.hpp"

using namespace spba;

namespace {

double sign_fraction(const Oracle& o, double x, int a, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return static_cast<double>(o.query_batch(x, a, rng).b) / a;
}

}  // namespace

TEST_CASE("synthetic true theta and accuracy") {
  const SyntheticOracle lin(SyntheticOracle::Kind::linear, 1.0 / 3.0);
  CHECK(lin.true_theta(1.0 / 3.0) == doctest::Approx(0.5));
  // Phi((1/3)/0.2) = Phi(5/3)
  CHECK(lin.true_theta(0.0) == doctest::Approx(0.9522096477).epsilon(1e-7));
  CHECK(lin.true_accuracy(0.0) == doctest::Approx(0.9522096477).epsilon(1e-7));
  // symmetry of the linear h with constant sigma
  CHECK(lin.true_accuracy(1.0 / 3 - 0.1) ==
        doctest::Approx(lin.true_accuracy(1.0 / 3 + 0.1)).epsilon(1e-12));

  const SyntheticOracle expo(SyntheticOracle::Kind::exponential, 0.5);
  CHECK(expo.sigma(0.4) == doctest::Approx(0.2));
  CHECK(expo.sigma(0.6) == doctest::Approx(1.0));
  CHECK(expo.true_theta(0.5) == doctest::Approx(0.5));

  const SyntheticOracle cub(SyntheticOracle::Kind::cubic, 0.5);
  CHECK(cub.true_theta(0.5) == doctest::Approx(0.5));
  // h'(x*) = 0 flattens accuracy near the root
  CHECK(cub.true_accuracy(0.52) < 0.51);
}

TEST_CASE("law of large numbers at key sites") {
  const SyntheticOracle lin(SyntheticOracle::Kind::linear, 1.0 / 3.0);
  const int a = 100000;
  {
    const double se = 0.5 / std::sqrt(static_cast<double>(a));
    CHECK(std::abs(sign_fraction(lin, 1.0 / 3.0, a, 10) - 0.5) < 3 * se);
  }
  {
    const double th = 0.9522096477;
    const double se = std::sqrt(th * (1 - th) / a);
    CHECK(std::abs(sign_fraction(lin, 0.0, a, 11) - th) < 3 * se);
  }
  const SyntheticOracle cub(SyntheticOracle::Kind::cubic, 0.5);
  const double se = 0.5 / std::sqrt(static_cast<double>(a));
  CHECK(std::abs(sign_fraction(cub, 0.52, a, 12) - 0.5) < 3 * se + 0.001);
}

TEST_CASE("chi-square goodness of fit across a site grid") {
  const SyntheticOracle lin(SyntheticOracle::Kind::linear, 0.4);
  std::mt19937_64 rng(77);
  const int a = 2000;
  double chi2 = 0.0;
  int k = 0;
  for (double x = 0.05; x < 1.0; x += 0.05) {
    const double th = lin.true_theta(x);
    const BatchResponse r = lin.query_batch(x, a, rng);
    const double e = a * th;
    chi2 += (r.b - e) * (r.b - e) / (a * th * (1.0 - th));
    ++k;
  }
  // chi^2_{19} upper 1% critical value
  REQUIRE(k == 19);
  CHECK(chi2 < 36.1909);
}

TEST_CASE("seeded determinism and input validation") {
  const SyntheticOracle lin(SyntheticOracle::Kind::linear, 0.4);
  std::mt19937_64 r1(9), r2(9);
  for (int i = 0; i < 10; ++i)
    CHECK(lin.query_batch(0.3, 20, r1).b == lin.query_batch(0.3, 20, r2).b);
  std::mt19937_64 rng(9);
  CHECK_THROWS_AS(lin.query_batch(-0.1, 5, rng), std::invalid_argument);
  CHECK_THROWS_AS(lin.query_batch(0.3, 0, rng), std::invalid_argument);
  CHECK_THROWS_AS(SyntheticOracle(SyntheticOracle::Kind::linear, 1.2),
                  std::invalid_argument);
}

TEST_CASE("bermudan oracle basics") {
  BermudanOracle::Params p;
  p.vol = 0.2;
  const auto table = BermudanOracle::compute_boundary(p, 2024, 500, 4000);
  REQUIRE(table.size() == 9);
  // the put boundary increases toward the strike near maturity
  for (std::size_t i = 1; i < table.size(); ++i)
    CHECK(table[i].second > table[i - 1].second - 0.1);
  CHECK(table.back().second < p.strike);
  CHECK(table.back().second > 36.0);

  const BermudanOracle o(p, table);
  CHECK(o.cost_per_sign() == 25);
  CHECK(o.payoff(0.6, 35.0) == doctest::Approx(std::exp(-0.036) * 5.0));
  CHECK(o.payoff(0.6, 45.0) == 0.0);
  CHECK_FALSE(o.has_true_theta());
  CHECK_THROWS_AS(o.true_theta(30.0), std::logic_error);

  std::mt19937_64 rng(5);
  // x = K: zero immediate payoff, so raw timing values are >= 0 pathwise
  const BatchResponse at_k = o.raw_query_batch(40.0, 300, rng);
  CHECK(at_k.b > 290);
  // deep in the money: exercise now beats continuation
  const BatchResponse deep = o.raw_query_batch(25.0, 300, rng);
  CHECK(deep.b < 120);
  // normalized convention flips the raw signs
  std::mt19937_64 ra(31), rb(31);
  const BatchResponse raw = o.raw_query_batch(33.0, 50, ra);
  const BatchResponse norm = o.query_batch(33.0, 50, rb);
  CHECK(norm.b == raw.a - raw.b);
}

TEST_CASE("bermudan sign fraction near the reference root") {
  BermudanOracle::Params p;
  p.vol = 0.2;
  const auto table = BermudanOracle::compute_boundary(p, 9, 500, 4000);
  const BermudanOracle o(p, table);
  std::mt19937_64 rng(17);
  const int a = 10000;
  const BatchResponse r = o.raw_query_batch(35.1249, a, rng);
  const double se = 0.5 / std::sqrt(static_cast<double>(a));
  // the pre-averaged accuracy is ~1/2 at the root; allow boundary-table bias
  CHECK(std::abs(static_cast<double>(r.b) / a - 0.5) < 3 * se + 0.05);
}

TEST_CASE("boundary csv round trip") {
  BermudanOracle::Params p;
  const BermudanOracle::BoundaryTable table = {
      {0.64, 33.7}, {0.68, 33.9}, {0.72, 34.2}, {0.76, 34.5}, {0.8, 34.9},
      {0.84, 35.3}, {0.88, 35.8}, {0.92, 36.5}, {0.96, 37.5}};
  const std::string path = "/tmp/spba_test_boundary.csv";
  BermudanOracle::write_boundary_csv(table, path);
  const auto back = BermudanOracle::read_boundary_csv(path);
  REQUIRE(back.size() == table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    CHECK(back[i].first == doctest::Approx(table[i].first));
    CHECK(back[i].second == doctest::Approx(table[i].second));
  }
  std::remove(path.c_str());
  // a truncated table is rejected
  BermudanOracle::BoundaryTable missing(table.begin(), table.begin() + 4);
  CHECK_THROWS_AS(BermudanOracle(p, missing), std::invalid_argument);
}
