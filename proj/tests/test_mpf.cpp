#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "mmg/mpf.hpp"
#include "mmg/rng.hpp"

using namespace mmg;

namespace {

bool implies(Verdict p, Verdict q) {
  // the chain is violated only by "antecedent holds, consequent fails"
  return !(p == Verdict::kHolds && q == Verdict::kFails);
}

}  // namespace

TEST_CASE("evaluation of the builtin catalog") {
  CHECK(MPFunction::identity()(1.7) == 1.7);
  CHECK(MPFunction::ratio()(1.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(MPFunction::cap(2.0)(3.5) == 2.0);
  CHECK(MPFunction::cap(2.0)(1.5) == 1.5);
  MPFunction ch = MPFunction::chordal(3.0);
  CHECK(ch(0.0) == 0.0);
  // 2r sin(s/2r) at s = pi r is the full chord 2r
  CHECK(ch(M_PI * 3.0) == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(ch(20.0) == 6.0);  // capped past the antipode
  CHECK(ch(0.01) == doctest::Approx(0.01).epsilon(1e-6));
  CHECK(MPFunction::square()(3.0) == 9.0);
  CHECK(MPFunction::fn2(5)(8.0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(MPFunction::fn3(5)(8.0) == doctest::Approx(1.0).epsilon(1e-12));
  MPFunction comp = MPFunction::compose(MPFunction::cap(2.0),
                                        MPFunction::identity());
  CHECK(comp(3.0) == 2.0);
}

TEST_CASE("catalog lookup and json round trip") {
  CHECK(MPFunction::builtin("cap:2")(5.0) == 2.0);
  CHECK(MPFunction::builtin("fn1:3")(2.0) == doctest::Approx(2.0));
  MPFunction f = MPFunction::fn2(4);
  MPFunction g = MPFunction::from_json(f.to_json());
  for (double s : {0.0, 1.0, 2.0, 5.9, 6.0, 7.0, 8.0, 30.0})
    CHECK(f(s) == doctest::Approx(g(s)).epsilon(1e-12));
  CHECK_THROWS(MPFunction::builtin("no_such_function"));
}

TEST_CASE("validate_mpf accepts the preserving catalog") {
  for (const char* name : {"identity", "ratio", "cap:2", "chordal:3",
                           "hump", "fn1:4", "fn2:4", "fn3:4"}) {
    ConditionReport r = validate_mpf(MPFunction::builtin(name));
    CHECK_MESSAGE(r.metric_preserving, name);
  }
}

TEST_CASE("validate_mpf rejects square") {
  ConditionReport r = validate_mpf(MPFunction::square());
  CHECK(!r.metric_preserving);
  CHECK(r.subadditive.state == Verdict::kFails);
}

TEST_CASE("hump is preserving but not monotone") {
  ConditionReport r = validate_mpf(MPFunction::hump());
  CHECK(r.metric_preserving);
  CHECK(r.nondecreasing.state == Verdict::kFails);
}

TEST_CASE("monotone defect is exact for piecewise linear functions") {
  CHECK(monotone_defect(MPFunction::identity(), 3.0) == 0.0);
  // hump: F(2) = 2, inf over [2, inf) = 1
  CHECK(monotone_defect(MPFunction::hump(), 2.0) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(monotone_defect(MPFunction::fn3(5), 2.0) ==
        doctest::Approx(1.0).epsilon(1e-12));
  // fn2(5): F(8) = 3, tail inf = 2
  CHECK(monotone_defect(MPFunction::fn2(5), 8.0) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sup_monotone_defect(MPFunction::fn2(5)) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sup_monotone_defect(MPFunction::fn1(5)) ==
        doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("classify_family reproduces the three standard families") {
  ConditionReport r1 = classify_family(builtin_family("fn1"));
  CHECK(r1.ii.state == Verdict::kHolds);
  CHECK(r1.i.state == Verdict::kFails);

  ConditionReport r2 = classify_family(builtin_family("fn2"));
  CHECK(r2.b.state == Verdict::kHolds);
  CHECK(r2.ii.state == Verdict::kFails);
  CHECK(r2.ii.witness_s == doctest::Approx(103.0));  // n + 3 at n = 100
  CHECK(r2.ii.witness_value == doctest::Approx(1.0));

  ConditionReport r3 = classify_family(builtin_family("fn3"));
  CHECK(r3.iii.state == Verdict::kHolds);
  CHECK(r3.b.state == Verdict::kFails);
  CHECK(r3.b.witness_s == doctest::Approx(2.0));
  CHECK(r3.b.witness_value == doctest::Approx(1.0));
}

TEST_CASE("the three standard families share the limit min(s, 2)") {
  MPFunction cap2 = MPFunction::cap(2.0);
  for (const char* name : {"fn1", "fn2", "fn3"}) {
    MPFamily fam = builtin_family(name);
    for (double s = 0.0; s <= 10.0; s += 0.37)
      CHECK(fam.limit(s) == doctest::Approx(cap2(s)).epsilon(1e-12));
  }
}

TEST_CASE("chordal family satisfies (a), (b), (d)") {
  MPFamily fam = chordal_family([](int n) { return std::sqrt(double(n)); });
  ConditionReport r = classify_family(fam);
  CHECK(r.a.state == Verdict::kHolds);
  CHECK(r.b.state == Verdict::kHolds);
  CHECK(r.c.state == Verdict::kHolds);  // sup of the identity is infinite
  CHECK(r.d.state == Verdict::kHolds);
}

TEST_CASE("implication chain holds on a randomized corpus") {
  for (int t = 0; t < 100; ++t) {
    Philox rng(9000 + t);
    // random nondecreasing-ish base with an optional dip, plus an
    // n-dependent perturbation that may or may not vanish
    double s1 = 0.5 + 2.0 * rng.next_double();
    double v1 = 0.5 + 2.0 * rng.next_double();
    double s2 = s1 + 0.5 + 2.0 * rng.next_double();
    double v2 = rng.next_double() < 0.5 ? v1 + rng.next_double()
                                        : 0.2 + 0.8 * v1 * rng.next_double();
    bool vanishing = rng.next_double() < 0.5;
    bool monotone_n = rng.next_double() < 0.5;
    // value of the s2 breakpoint at index n, and its limit; the declared
    // limit has to be the actual limit of the generators or the report is
    // classifying garbage
    auto w2_of = [=](double bump) {
      double w2 = monotone_n ? std::max(v1, v2) + bump : v2 - bump * 0.3;
      return std::max(0.1, w2);
    };
    double vlim = w2_of(vanishing ? 0.0 : 0.7);
    MPFamily fam;
    fam.name = "fuzz";
    fam.limit = MPFunction::from_pwl(
        {{{0.0, 0.0}, {s1, v1}, {s2, vlim}}, TailKind::kConstant, 0.0});
    fam.generator = [=](int n) {
      return MPFunction::from_pwl(
          {{{0.0, 0.0}, {s1, v1}, {s2, w2_of(vanishing ? 1.0 / n : 0.7)}},
           TailKind::kConstant,
           0.0});
    };
    ConditionReport r = classify_family(fam);
    CHECK(implies(r.i.state, r.ii.state));
    CHECK(implies(r.ii.state, r.b.state));
    CHECK(implies(r.b.state, r.iii.state));
  }
}
