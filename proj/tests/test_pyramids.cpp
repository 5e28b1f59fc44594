#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mmg/models.hpp"
#include "mmg/pyramids.hpp"

using namespace mmg;

namespace {

PyramidApprox chain_of(std::initializer_list<double> seps) {
  std::vector<FiniteMMSpace> chain;
  std::vector<std::vector<std::size_t>> wits;
  for (double s : seps) chain.push_back(two_point(s));
  for (std::size_t m = 0; m + 1 < chain.size(); ++m) {
    std::vector<std::size_t> w(chain[m + 1].size());
    for (std::size_t i = 0; i < w.size(); ++i)
      w[i] = std::min(i, chain[m].size() - 1);
    wits.push_back(std::move(w));
  }
  return pyramid_from_chain(std::move(chain), std::move(wits));
}

}  // namespace

TEST_CASE("pyramid verification") {
  PyramidApprox P = chain_of({0.5, 1.0, 2.0});
  CHECK(P.size() == 3);
  // breaking a witness (wrong pushforward) must throw
  P.witnesses[0] = {0, 0};
  CHECK_THROWS_AS(verify_pyramid(P), InvalidPyramid);
  // non-monotone chain: a 1-Lipschitz witness cannot exist
  CHECK_THROWS_AS(chain_of({2.0, 1.0}), InvalidPyramid);
}

TEST_CASE("dist_to_pyramid hits zero for chain members") {
  PyramidApprox P = chain_of({0.5, 1.0, 2.0});
  BoxBracket b = dist_to_pyramid(two_point(1.0), P, 100000, 3);
  CHECK(b.upper == doctest::Approx(0.0).epsilon(1e-12));
  // dominated probes also sit inside the pyramid
  BoxBracket c = dist_to_pyramid(two_point(1.7), P, 100000, 3);
  CHECK(c.upper <= 1e-9);
}

TEST_CASE("dist_to_pyramid separates far probes") {
  PyramidApprox P = chain_of({0.25});
  BoxBracket b = dist_to_pyramid(two_point(4.0), P, 100000, 3);
  CHECK(b.lower > 0.2);
  CHECK(b.lower <= b.upper + 1e-12);
}

TEST_CASE("weak_convergence_probe classifies both regimes") {
  std::vector<PyramidApprox> seq;
  std::vector<int> idx;
  double s = 2.0;
  for (int i = 0; i < 4; ++i, s *= 4.0) {
    seq.push_back(chain_of({0.0, s}));
    idx.push_back(i);
  }
  FiniteMMSpace fat = validate_space_or_throw(
      {0, 1, 1, 1, 0, 1, 1, 1, 0}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  WeakConvergenceDiagnostic diag =
      weak_convergence_probe(seq, idx, {two_point(1.0), fat}, 50000, 3);
  REQUIRE(diag.probes.size() == 2);
  CHECK(diag.probes[0].verdict == "to_zero");
  CHECK(diag.probes[1].verdict == "bounded_away");
  CHECK(diag.probes[1].inf_lower > 0.0);
}

TEST_CASE("gaussian pyramid approximation verifies") {
  PyramidApprox P = build_gaussian_pyramid_approx(1.0, {1, 2, 4}, 60, 5);
  CHECK(P.size() == 3);
  verify_pyramid(P);  // must not throw
  CHECK(P.chain[0].size() == 60);
  // quotient variant
  PyramidApprox Q = build_gaussian_pyramid_approx(1.0, {2, 3}, 40, 5, 2);
  verify_pyramid(Q);
}

TEST_CASE("pyramid json round trip") {
  PyramidApprox P = chain_of({0.5, 1.5});
  PyramidApprox Q = pyramid_from_json(pyramid_to_json(P));
  CHECK(Q.size() == P.size());
  CHECK(Q.witnesses == P.witnesses);
  CHECK(Q.chain[1].dist == P.chain[1].dist);
}
