#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>

#include "mmg/boxdist.hpp"
#include "mmg/models.hpp"
#include "mmg/probmetrics.hpp"
#include "oracles.hpp"

using namespace mmg;

namespace {

std::size_t lcm2(std::size_t a, std::size_t b) { return a / std::gcd(a, b) * b; }

}  // namespace

TEST_CASE("identical spaces are at distance zero") {
  FiniteMMSpace X = oracles::random_euclidean_space(5, 2, 2.0, 1, true);
  BoxBracket b = box_estimate(X, X);
  CHECK(b.lower == 0.0);
  CHECK(b.upper == 0.0);
  CHECK(b.method == "identical");
}

TEST_CASE("two-point vs one-point has box distance 1/2") {
  FiniteMMSpace X = two_point(1.0);
  FiniteMMSpace pt = two_point(0.0);
  CHECK(box_oracle_tiny(X, pt, 8) == doctest::Approx(0.5).epsilon(1e-9));
  BoxBracket b = box_estimate(X, pt);
  CHECK(b.upper == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(b.lower <= 0.5 + 1e-9);
  CHECK(b.lower >= 0.25 - 1e-9);  // dd bound gives prok/2 = 1/4
}

TEST_CASE("sandwich: dd lower <= tiny oracle <= estimator upper") {
  int done = 0;
  for (int t = 0; done < 40; ++t) {
    std::size_t nx = 1 + t % 4, ny = 1 + (t / 3) % 4;
    if (lcm2(nx, ny) > 8) continue;
    ++done;
    FiniteMMSpace X =
        oracles::random_euclidean_space(nx, 2, 1.5, 1300 + t, true);
    FiniteMMSpace Y =
        oracles::random_euclidean_space(ny, 2, 1.5, 2300 + t, true);
    double oracle = box_oracle_tiny(X, Y, int(lcm2(nx, ny)));
    BoxBracket b = box_estimate(X, Y, 200000, 11 + t);
    CHECK(box_lower_dd(X, Y) - 1e-9 <= oracle);
    CHECK(oracle <= b.upper + 1e-9);
    CHECK(b.lower <= b.upper + 1e-12);
  }
}

TEST_CASE("estimate is symmetric in its arguments") {
  for (int t = 0; t < 10; ++t) {
    FiniteMMSpace X =
        oracles::random_euclidean_space(3, 2, 1.5, 3300 + t, true);
    FiniteMMSpace Y =
        oracles::random_euclidean_space(4, 2, 1.5, 4300 + t, true);
    BoxBracket ab = box_estimate(X, Y, 100000, 5);
    BoxBracket ba = box_estimate(Y, X, 100000, 5);
    CHECK(ab.upper == ba.upper);
    CHECK(ab.lower == ba.lower);
  }
}

TEST_CASE("same-metric route is within twice the Prokhorov distance") {
  for (int t = 0; t < 30; ++t) {
    FiniteMMSpace X =
        oracles::random_euclidean_space(8, 3, 2.0, 5300 + t, false);
    auto nu = oracles::random_simplex(8, 6300 + t);
    FiniteMMSpace Y = validate_space_or_throw(X.dist, nu, X.labels);
    // supports may differ after validation; compare on the common matrix
    if (Y.size() != X.size()) continue;
    double prok = prokhorov(X.dist, X.size(), X.weights, nu);
    BoxBracket b = box_estimate(X, Y, 100000, 7);
    CHECK(b.upper <= 2.0 * prok + 1e-6);
  }
}

TEST_CASE("alignment upper bound checks its inputs") {
  FiniteMMSpace X = two_point(1.0);
  ParameterAlignment align;
  align.lengths = {0.5, 0.5};
  align.to_x = {0, 1};
  align.to_y = {0, 1};
  CHECK(box_upper_from_alignment(X, X, align, {false, false}) ==
        doctest::Approx(0.0));
  align.lengths = {0.7, 0.5};  // not a partition of [0,1)
  CHECK_THROWS_AS(box_upper_from_alignment(X, X, align, {false, false}),
                  InvalidAlignment);
}

TEST_CASE("cert route: 3 eps soundness and rejection") {
  FiniteMMSpace X = oracles::random_euclidean_space(6, 2, 2.0, 7300, true);
  EpsMMIsoCert cert;
  cert.map.assign(6, 0);
  for (std::size_t i = 0; i < 6; ++i) cert.map[i] = i;
  cert.domain = {0, 1, 2, 3, 4, 5};
  cert.eps = 0.0;
  CHECK(box_upper_from_cert(X, X, cert) == doctest::Approx(0.0));
  EpsMMIsoCert bad = cert;
  bad.map = {1, 0, 2, 3, 4, 5};  // swaps two points: distortion, bad push ok
  bad.eps = 0.0;
  CHECK_THROWS_AS(box_upper_from_cert(X, two_point(1.0), bad), CertRejected);
}

TEST_CASE("perturbed spaces: estimator stays within 3 eps of the jitter") {
  for (int t = 0; t < 15; ++t) {
    Philox rng(8300 + t);
    std::size_t n = 5;
    std::vector<double> pts(n * 2);
    for (double& p : pts) p = 2.0 * rng.next_double();
    auto space_of = [&](double jitter) {
      Philox jrng(9300 + t);
      std::vector<double> q(pts);
      for (double& v : q) v += jitter * (jrng.next_double() - 0.5);
      std::vector<double> dist(n * n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          dist[i * n + j] = std::hypot(q[i * 2] - q[j * 2],
                                       q[i * 2 + 1] - q[j * 2 + 1]);
      return validate_space_or_throw(std::move(dist),
                                     std::vector<double>(n, 1.0 / n));
    };
    FiniteMMSpace X = space_of(0.0);
    FiniteMMSpace Y = space_of(0.08);
    double eps = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        eps = std::max(eps, std::abs(X.d(i, j) - Y.d(i, j)));
    BoxBracket b = box_estimate(X, Y, 200000, 13 + t);
    CHECK(b.upper <= 3.0 * eps + 1e-6);
  }
}

TEST_CASE("bracket-level triangle inequality") {
  for (int t = 0; t < 15; ++t) {
    FiniteMMSpace X =
        oracles::random_euclidean_space(3, 2, 1.5, 10300 + t, true);
    FiniteMMSpace Y =
        oracles::random_euclidean_space(3, 2, 1.5, 11300 + t, true);
    FiniteMMSpace Z =
        oracles::random_euclidean_space(3, 2, 1.5, 12300 + t, true);
    BoxBracket xz = box_estimate(X, Z, 100000, 3);
    BoxBracket xy = box_estimate(X, Y, 100000, 3);
    BoxBracket yz = box_estimate(Y, Z, 100000, 3);
    CHECK(xz.lower <= xy.upper + yz.upper + 1e-9);
  }
}

TEST_CASE("bracket json round trip") {
  FiniteMMSpace X = two_point(1.0);
  BoxBracket b = box_estimate(X, two_point(0.0));
  BoxBracket c = bracket_from_json(bracket_to_json(b));
  CHECK(c.lower == b.lower);
  CHECK(c.upper == b.upper);
  CHECK(c.method == b.method);
  CHECK(c.has_cert == b.has_cert);
}
