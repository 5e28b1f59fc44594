// Acceptance gate: one line per criterion, nonzero exit when any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "mmg/boxdist.hpp"
#include "mmg/core.hpp"
#include "mmg/lab.hpp"
#include "mmg/models.hpp"
#include "mmg/mpf.hpp"
#include "mmg/probmetrics.hpp"
#include "mmg/rng.hpp"
#include "oracles.hpp"

using namespace mmg;

namespace {

int g_failures = 0;

void report(int criterion, const char* what, bool pass,
            const std::string& detail = "") {
  std::printf("criterion %d (%s): %s%s%s\n", criterion, what,
              pass ? "PASS" : "FAIL", detail.empty() ? "" : " - ",
              detail.c_str());
  if (!pass) ++g_failures;
}

double now_minus(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

void criterion1() {
  auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    std::size_t n = 2 + t % 5;
    FiniteMMSpace X =
        oracles::random_euclidean_space(n, 2, 1.5, 100 + t, false);
    auto nu = oracles::random_simplex(X.size(), 5000 + t);
    double engine = prokhorov(X.dist, X.size(), X.weights, nu);
    double oracle =
        oracles::prok_subset_oracle(X.dist, X.size(), X.weights, nu);
    worst = std::max(worst, std::abs(engine - oracle));
  }
  double secs = now_minus(t0);
  char buf[128];
  std::snprintf(buf, sizeof buf, "max |engine - oracle| = %.2e, %.2f s",
                worst, secs);
  report(1, "prokhorov exactness", worst <= 1e-9 && secs < 10.0, buf);
}

void criterion2() {
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    Philox rng(3100 + t);
    std::size_t n = 1 + t % 10;
    WeightedDeviation dev;
    auto w = oracles::random_simplex(n, 4100 + t);
    for (std::size_t i = 0; i < n; ++i)
      dev.atoms.emplace_back(1.5 * rng.next_double(), w[i]);
    worst = std::max(worst,
                     std::abs(ky_fan(dev) - oracles::ky_fan_oracle(dev.atoms)));
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "max deviation %.2e", worst);
  report(2, "ky fan exactness", worst <= 1e-12, buf);
}

void criterion3() {
  double worst = -1.0;
  for (int t = 0; t < 1000; ++t) {
    FiniteMMSpace X = oracles::random_euclidean_space(6, 2, 2.0, 88 + t, true);
    Philox rng(5200 + t);
    std::size_t m = 12;
    auto mu = oracles::random_simplex(m, 6200 + t);
    std::vector<std::size_t> f(m), g(m);
    for (std::size_t i = 0; i < m; ++i) {
      f[i] = rng.next_u64() % 6;
      g[i] = rng.next_u64() % 6;
    }
    auto [prok, kf] = prok_dominates_kyfan_check(X.dist, 6, mu, f, g);
    worst = std::max(worst, prok - kf);
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "max prok - kyfan = %.2e", worst);
  report(3, "prok <= ky fan on 1000 instances", worst <= 1e-9, buf);
}

void criterion4() {
  bool pass = true;
  std::string detail;
  // sandwich on tiny uniform pairs
  int done = 0;
  for (int t = 0; done < 100; ++t) {
    std::size_t nx = 1 + t % 4, ny = 1 + (t / 4) % 4;
    std::size_t l = nx / std::gcd(nx, ny) * ny;
    if (l > 8) continue;
    ++done;
    FiniteMMSpace X =
        oracles::random_euclidean_space(nx, 2, 1.5, 1300 + t, true);
    FiniteMMSpace Y =
        oracles::random_euclidean_space(ny, 2, 1.5, 2300 + t, true);
    double oracle = box_oracle_tiny(X, Y, int(l));
    BoxBracket b = box_estimate(X, Y, 200000, 11 + t);
    if (box_lower_dd(X, Y) - 1e-9 > oracle || oracle > b.upper + 1e-9) {
      pass = false;
      detail = "sandwich violated at pair " + std::to_string(t);
      break;
    }
  }
  // 3 eps route on generated certificates
  for (int t = 0; pass && t < 100; ++t) {
    Philox rng(8300 + t);
    std::size_t n = 4 + t % 3;
    std::vector<double> pts(n * 2);
    for (double& p : pts) p = 2.0 * rng.next_double();
    auto space_of = [&](double jitter, std::uint64_t js) {
      Philox jrng(js);
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
    FiniteMMSpace X = space_of(0.0, 0);
    FiniteMMSpace Y = space_of(0.02 + 0.1 * rng.next_double(), 9300 + t);
    EpsMMIsoCert cert;
    cert.map.resize(n);
    std::iota(cert.map.begin(), cert.map.end(), 0);
    cert.domain = cert.map;
    double eps = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        eps = std::max(eps, std::abs(X.d(i, j) - Y.d(i, j)));
    cert.eps = eps;
    if (box_upper_from_cert(X, Y, cert) > 3.0 * eps + 1e-12) {
      pass = false;
      detail = "cert route exceeded 3 eps";
    }
    BoxBracket b = box_estimate(X, Y, 200000, 13 + t);
    if (b.upper > 3.0 * eps + 1e-6) {
      pass = false;
      detail = "estimator above 3 eps at t=" + std::to_string(t);
    }
  }
  // twice-Prokhorov route on shared metric spaces
  for (int t = 0; pass && t < 100; ++t) {
    FiniteMMSpace X =
        oracles::random_euclidean_space(8, 3, 2.0, 5300 + t, false);
    auto nu = oracles::random_simplex(8, 6300 + t);
    FiniteMMSpace Y = validate_space_or_throw(X.dist, nu, X.labels);
    double prok = prokhorov(X.dist, X.size(), X.weights, nu);
    BoxBracket b = box_estimate(X, Y, 100000, 7);
    if (b.upper > 2.0 * prok + 1e-6) {
      pass = false;
      detail = "same-metric route above 2 prok at t=" + std::to_string(t);
    }
  }
  report(4, "box sandwich and certificate routes", pass, detail);
}

void criterion5() {
  bool pass = true;
  std::string detail;
  ConditionReport r1 = classify_family(builtin_family("fn1"));
  if (r1.ii.state != Verdict::kHolds || r1.i.state != Verdict::kFails) {
    pass = false;
    detail = "fn1 classification";
  }
  ConditionReport r2 = classify_family(builtin_family("fn2"));
  if (r2.b.state != Verdict::kHolds || r2.ii.state != Verdict::kFails ||
      std::abs(r2.ii.witness_s - 103.0) > 1e-12 ||
      std::abs(r2.ii.witness_value - 1.0) > 1e-12) {
    pass = false;
    detail = "fn2 classification / witness";
  }
  ConditionReport r3 = classify_family(builtin_family("fn3"));
  if (r3.iii.state != Verdict::kHolds || r3.b.state != Verdict::kFails ||
      std::abs(r3.b.witness_s - 2.0) > 1e-12 ||
      std::abs(r3.b.witness_value - 1.0) > 1e-12) {
    pass = false;
    detail = "fn3 classification / witness";
  }
  MPFunction cap2 = MPFunction::cap(2.0);
  for (const char* name : {"fn1", "fn2", "fn3"}) {
    MPFamily fam = builtin_family(name);
    for (double s = 0.0; s <= 12.0; s += 0.13)
      if (std::abs(fam.limit(s) - cap2(s)) > 1e-12) {
        pass = false;
        detail = std::string("limit of ") + name + " is not min(s, 2)";
      }
  }
  auto implies = [](Verdict p, Verdict q) {
    return !(p == Verdict::kHolds && q == Verdict::kFails);
  };
  for (int t = 0; pass && t < 500; ++t) {
    Philox rng(9000 + t);
    double s1 = 0.5 + 2.0 * rng.next_double();
    double v1 = 0.5 + 2.0 * rng.next_double();
    double s2 = s1 + 0.5 + 2.0 * rng.next_double();
    double v2 = rng.next_double() < 0.5 ? v1 + rng.next_double()
                                        : 0.2 + 0.8 * v1 * rng.next_double();
    bool vanishing = rng.next_double() < 0.5;
    bool monotone_n = rng.next_double() < 0.5;
    // keep the declared limit equal to the actual limit of the generators
    auto w2_of = [=](double bump) {
      double w2 = monotone_n ? std::max(v1, v2) + bump : v2 - bump * 0.3;
      return std::max(0.1, w2);
    };
    MPFamily fam;
    fam.name = "fuzz";
    fam.limit = MPFunction::from_pwl(
        {{{0.0, 0.0}, {s1, v1}, {s2, w2_of(vanishing ? 0.0 : 0.7)}},
         TailKind::kConstant,
         0.0});
    fam.generator = [=](int n) {
      return MPFunction::from_pwl(
          {{{0.0, 0.0}, {s1, v1}, {s2, w2_of(vanishing ? 1.0 / n : 0.7)}},
           TailKind::kConstant,
           0.0});
    };
    ConditionReport r = classify_family(fam);
    if (!implies(r.i.state, r.ii.state) || !implies(r.ii.state, r.b.state) ||
        !implies(r.b.state, r.iii.state)) {
      pass = false;
      detail = "implication chain broken at family " + std::to_string(t);
    }
  }
  report(5, "standard families and implication chain", pass, detail);
}

void criterion6() {
  bool pass = true;
  double worst_id = 0.0, worst_oracle = 0.0;
  for (int n : {10, 100, 800}) {
    double r = std::sqrt(static_cast<double>(n));
    PointCloud cloud = sphere_cloud(n + 1, r, 500, 7);
    FiniteMMSpace geo = space_from_cloud(cloud, MetricFlavor::kGeodesic, r);
    FiniteMMSpace euc = space_from_cloud(cloud, MetricFlavor::kEuclidean);
    for (std::size_t i = 0; i < geo.size(); ++i)
      for (std::size_t j = i + 1; j < geo.size(); ++j)
        worst_id = std::max(
            worst_id, std::abs(euc.d(i, j) -
                               2.0 * r * std::sin(geo.d(i, j) / (2.0 * r))));
    for (int field : {2, 4}) {
      PointCloud qc = sphere_cloud(field * (n + 1), r, 500, 7);
      FiniteMMSpace qgeo =
          quotient_space_from_cloud(qc, field, MetricFlavor::kGeodesic, r);
      FiniteMMSpace qeuc =
          quotient_space_from_cloud(qc, field, MetricFlavor::kEuclidean, r);
      for (std::size_t i = 0; i < qgeo.size(); ++i)
        for (std::size_t j = i + 1; j < qgeo.size(); ++j)
          worst_id = std::max(
              worst_id,
              std::abs(qeuc.d(i, j) -
                       2.0 * r * std::sin(qgeo.d(i, j) / (2.0 * r))));
      for (int p = 0; p < 12; ++p) {
        std::size_t i = (p * 41) % qgeo.size();
        std::size_t j = (i + 1 + p * 7) % qgeo.size();
        if (i == j) continue;
        double oracle = quotient_dist_grid_oracle(
            qc.row(i), qc.row(j), field, MetricFlavor::kEuclidean, r);
        worst_oracle =
            std::max(worst_oracle, std::abs(oracle - qeuc.d(i, j)));
      }
    }
  }
  pass = worst_id <= 1e-9 && worst_oracle <= 1e-6;
  char buf[128];
  std::snprintf(buf, sizeof buf,
                "max identity err %.2e, max oracle gap %.2e", worst_id,
                worst_oracle);
  report(6, "chordal identity on spheres and quotients", pass, buf);
}

struct SuiteRun {
  std::string stripped;
  nlohmann::json sphere_body;
  double sphere_seconds = 0.0;
};

SuiteRun run_suite(int threads) {
  SuiteRun out;
  ExperimentConfig cfg;
  cfg.experiment = "sphere-convergence";
  cfg.seed = 7;
  cfg.threads = threads;
  ExperimentReport sphere = run_experiment(cfg);
  out.sphere_seconds = sphere.body["timing"]["seconds"].get<double>();
  out.sphere_body = sphere.body;

  ExperimentConfig cx;
  cx.experiment = "counterexample";
  cx.selector = "fn2";
  cx.seed = 7;
  cx.threads = threads;
  ExperimentReport counter = run_experiment(cx);

  ExperimentConfig cm;
  cm.experiment = "condition-matrix";
  cm.seed = 7;
  cm.threads = threads;
  ExperimentReport matrix = run_experiment(cm);

  for (nlohmann::json b :
       {sphere.body, counter.body, matrix.body}) {
    b.erase("timing");
    out.stripped += b.dump();
    out.stripped += '\n';
  }
  return out;
}

void criteria789() {
  SuiteRun one = run_suite(1);
  SuiteRun three = run_suite(3);

  const auto& v = three.sphere_body["verdicts"];
  double final_obs = v["observable_final"].get<double>();
  bool pass7 = v["observable_decreasing"].get<bool>() &&
               v["observable_final_small"].get<bool>() &&
               v["box_vs_baseline"].get<bool>() &&
               three.sphere_seconds < 300.0;
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "observable at n=800: %.4f (<= 0.06), decreasing, box upper "
                "within 2x baseline, %.0f s",
                final_obs, three.sphere_seconds);
  report(7, "desk-scale convergence evidence", pass7, buf);

  ExperimentConfig cx;
  cx.experiment = "counterexample";
  cx.selector = "fn2";
  cx.seed = 7;
  ExperimentReport counter = run_counterexample(cx);
  double lower =
      counter.body["results"]["probe_vs_transformed"]["lower"].get<double>();
  double upper =
      counter.body["results"]["probe_vs_untransformed"]["upper"]
          .get<double>();
  std::snprintf(buf, sizeof buf, "transformed lower %.4f, untransformed "
                                 "upper %.1e",
                lower, upper);
  report(8, "counterexample obstruction", lower >= 0.25 && upper <= 0.0, buf);

  bool same = one.stripped == three.stripped;
  report(9, "determinism across --threads", same,
         same ? "byte-identical modulo timing" : "reports differ");
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criteria789();
  if (g_failures == 0) {
    std::printf("all acceptance criteria passed\n");
    return 0;
  }
  std::printf("%d acceptance criteria failed\n", g_failures);
  return 1;
}
