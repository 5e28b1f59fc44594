#include "mmg/lab.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "mmg/boxdist.hpp"
#include "mmg/core.hpp"
#include "mmg/models.hpp"
#include "mmg/mpf.hpp"
#include "mmg/probmetrics.hpp"
#include "mmg/pyramids.hpp"
#include "mmg/rng.hpp"
#include "mmg/transform.hpp"

namespace mmg {

namespace {

constexpr const char* kVersion = "0.1.0";

void parallel_for(int ntasks, int threads,
                  const std::function<void(int)>& fn) {
  if (threads <= 1 || ntasks <= 1) {
    for (int i = 0; i < ntasks; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  int nw = std::min(threads, ntasks);
  for (int w = 0; w < nw; ++w)
    pool.emplace_back([&] {
      int i;
      while ((i = next.fetch_add(1)) < ntasks) fn(i);
    });
  for (auto& t : pool) t.join();
}

std::vector<std::pair<double, double>> atoms_of(
    const std::vector<double>& values) {
  std::vector<std::pair<double, double>> atoms;
  double m = 1.0 / values.size();
  for (double v : values) atoms.emplace_back(v, m);
  return atoms;
}

void check_space(const FiniteMMSpace& X, std::uint64_t seed) {
  if (auto err = spot_check_space(X, 20000, seed)) {
    std::ostringstream msg;
    msg << "sampled space failed validation: " << space_error_name(err->kind)
        << " " << err->message;
    throw ConfigError(msg.str());
  }
}

nlohmann::json finish(nlohmann::json body, ExperimentReport& rep,
                      std::chrono::steady_clock::time_point t0, int threads) {
  bool ok = true;
  for (auto& [key, v] : body["verdicts"].items())
    if (v.is_boolean() && !v.get<bool>()) ok = false;
  double secs = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  body["timing"] = {
      {"seconds", secs},
      {"threads", threads},
      {"timestamp",
       std::chrono::duration_cast<std::chrono::seconds>(
           std::chrono::system_clock::now().time_since_epoch())
           .count()},
  };
  rep.ok = ok;
  return body;
}

PyramidApprox two_point_chain(const std::vector<double>& seps) {
  std::vector<FiniteMMSpace> chain;
  std::vector<std::vector<std::size_t>> wits;
  for (double s : seps) chain.push_back(two_point(s));
  for (std::size_t m = 0; m + 1 < chain.size(); ++m) {
    // ({0, s}) -> ({0, t}) by index is 1-Lipschitz when t <= s
    std::vector<std::size_t> w(chain[m + 1].size());
    for (std::size_t i = 0; i < w.size(); ++i)
      w[i] = std::min(i, chain[m].size() - 1);
    wits.push_back(std::move(w));
  }
  return pyramid_from_chain(std::move(chain), std::move(wits));
}

FiniteMMSpace four_point_unit() {
  FiniteMMSpace X;
  X.labels = {"a", "b", "c", "d"};
  X.weights.assign(4, 0.25);
  X.dist.assign(16, 1.0);
  for (int i = 0; i < 4; ++i) X.dist[i * 4 + i] = 0.0;
  return X;
}

nlohmann::json bracket_json(const BoxBracket& b) {
  return nlohmann::json::parse(bracket_to_json(b));
}

// Upper bound for equal-size uniform point clouds: match points
// geometrically (rank by angle, then transposition descent on squared
// displacement), drop the worst-distorted points greedily, and verify the
// resulting interval alignment. The generic estimator only sees the
// metrics; coordinates give a far better bijection here.
double matched_cloud_upper(const PointCloud& A, const PointCloud& B,
                           const FiniteMMSpace& X, const FiniteMMSpace& Y,
                           std::uint64_t seed) {
  const std::size_t n = X.size();
  if (A.count() != n || B.count() != n || A.dim != B.dim || A.dim < 1)
    return 1.0;
  // strip-sorted rank matching: sort by x, cut into ~sqrt(n) equal strips,
  // sort each strip by y; ranks of the two clouds are then matched
  auto strip_order = [&](const PointCloud& C) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t u, std::size_t v) {
      return C.row(u)[0] < C.row(v)[0];
    });
    if (C.dim >= 2) {
      std::size_t strips =
          static_cast<std::size_t>(std::ceil(std::sqrt(double(n))));
      std::size_t per = (n + strips - 1) / strips;
      for (std::size_t s = 0; s < n; s += per) {
        auto hi = idx.begin() + std::min(s + per, n);
        std::sort(idx.begin() + s, hi, [&](std::size_t u, std::size_t v) {
          return C.row(u)[1] < C.row(v)[1];
        });
      }
    }
    return idx;
  };
  std::vector<std::size_t> ra = strip_order(A), rb = strip_order(B);
  std::vector<std::size_t> sigma(n);
  for (std::size_t t = 0; t < n; ++t) sigma[ra[t]] = rb[t];

  auto disp2 = [&](std::size_t i, std::size_t target) {
    auto p = A.row(i);
    auto q = B.row(target);
    double s = 0.0;
    for (int c = 0; c < A.dim; ++c) s += (p[c] - q[c]) * (p[c] - q[c]);
    return s;
  };
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = disp2(i, sigma[i]);
  Philox rng(seed, substream(0x636d746368, 0));

  std::vector<bool> drop(n, false);
  std::vector<bool> best_drop(n, false);
  std::vector<std::size_t> best_sigma = sigma;
  std::vector<double> rowmax(n, 0.0);
  std::vector<std::size_t> argmax(n, 0);
  auto recompute_row = [&](std::size_t i) {
    rowmax[i] = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (drop[j] || j == i) continue;
      double dd = std::abs(X.d(i, j) - Y.d(sigma[i], sigma[j]));
      if (dd > rowmax[i]) {
        rowmax[i] = dd;
        argmax[i] = j;
      }
    }
  };
  double best = 1.0;
  std::size_t dropped = 0;
  std::size_t max_drops = std::min<std::size_t>(n / 4, 500);

  // alternate: displacement descent among kept points, then greedy drops on
  // metric distortion; later rounds re-match with the trimmed tails gone
  for (int round = 0; round < 3; ++round) {
    for (long t = 0; t < 700000; ++t) {
      std::size_t i = rng.next_u64() % n;
      std::size_t j = rng.next_u64() % n;
      if (i == j || drop[i] || drop[j]) continue;
      double ni = disp2(i, sigma[j]), nj = disp2(j, sigma[i]);
      if (ni + nj < d2[i] + d2[j]) {
        std::swap(sigma[i], sigma[j]);
        d2[i] = ni;
        d2[j] = nj;
      }
    }
    // bottleneck polish: take the worst kept point, find its best partner
    for (int t = 0; t < 4000; ++t) {
      std::size_t wi = n;
      double wmax = -1.0;
      for (std::size_t i = 0; i < n; ++i)
        if (!drop[i] && d2[i] > wmax) {
          wmax = d2[i];
          wi = i;
        }
      std::size_t bj = n;
      double gain = 0.0;
      for (int c = 0; c < 300; ++c) {
        std::size_t j = rng.next_u64() % n;
        if (j == wi || drop[j]) continue;
        double ni = disp2(wi, sigma[j]), nj = disp2(j, sigma[wi]);
        double g = wmax - std::max(ni, nj);
        if (g > gain) {
          gain = g;
          bj = j;
        }
      }
      if (bj == n) break;
      double ni = disp2(wi, sigma[bj]), nj = disp2(bj, sigma[wi]);
      std::swap(sigma[wi], sigma[bj]);
      d2[wi] = ni;
      d2[bj] = nj;
    }
    for (std::size_t i = 0; i < n; ++i)
      if (!drop[i]) recompute_row(i);
    while (true) {
      double worst = 0.0;
      std::size_t wi = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (!drop[i] && rowmax[i] > worst) {
          worst = rowmax[i];
          wi = i;
        }
      double eps = std::max(static_cast<double>(dropped) / n, worst);
      if (eps < best) {
        best = eps;
        best_drop = drop;
        best_sigma = sigma;
      }
      if (dropped >= max_drops ||
          static_cast<double>(dropped + 1) / n >= best)
        break;
      // drop the endpoint of the worst pair that is itself worse placed,
      // else a single bad point survives while all its partners get dropped
      std::size_t wj = argmax[wi];
      if (!drop[wj] && d2[wj] > d2[wi]) wi = wj;
      drop[wi] = true;
      ++dropped;
      for (std::size_t i = 0; i < n; ++i)
        if (!drop[i] && argmax[i] == wi) recompute_row(i);
    }
  }
  sigma = best_sigma;

  ParameterAlignment align;
  align.lengths.assign(n, 1.0 / static_cast<double>(n));
  align.to_x.resize(n);
  align.to_y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    align.to_x[i] = i;
    align.to_y[i] = sigma[i];
  }
  double verified = box_upper_from_alignment(X, Y, align, best_drop);
  if (std::getenv("MMGEO_DEBUG_MATCH")) {
    double md = 0.0, sd = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      md = std::max(md, std::sqrt(d2[i]));
      sd += std::sqrt(d2[i]);
    }
    std::fprintf(stderr,
                 "match n=%zu maxdisp=%.3f meandisp=%.3f greedy_best=%.3f "
                 "dropped=%zu verified=%.3f\n",
                 n, md, sd / n, best, dropped, verified);
  }
  return std::min(1.0, verified);
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  cfg.experiment = j.value("experiment", std::string());
  cfg.model = j.value("model", cfg.model);
  cfg.field = j.value("field", cfg.field);
  cfg.lambda_rule = j.value("lambda_rule", cfg.lambda_rule);
  if (j.contains("indices")) cfg.indices = j["indices"].get<std::vector<int>>();
  cfg.k = j.value("k", cfg.k);
  if (j.contains("projections"))
    cfg.projections = j["projections"].get<std::vector<int>>();
  cfg.selector = j.value("selector", cfg.selector);
  if (j.contains("families"))
    cfg.families = j["families"].get<std::vector<std::string>>();
  cfg.seed = j.value("seed", cfg.seed);
  cfg.tol = j.value("tol", cfg.tol);
  if (cfg.indices.empty()) throw ConfigError("indices must be nonempty");
  if (cfg.k < 2) throw ConfigError("k must be >= 2");
  if (cfg.model != "sphere" && cfg.model != "projective")
    throw ConfigError("model must be sphere or projective");
  if (cfg.lambda_rule != "constant" && cfg.lambda_rule != "vanishing")
    throw ConfigError("lambda_rule must be constant or vanishing");
  if (cfg.field != "R" && cfg.field != "C" && cfg.field != "H")
    throw ConfigError("field must be R, C or H");
  return cfg;
}

nlohmann::json ExperimentConfig::to_json() const {
  // threads are runtime plumbing, not part of the experiment identity;
  // they live under timing so reports stay byte-identical across --threads
  nlohmann::json j;
  j["experiment"] = experiment;
  j["model"] = model;
  j["field"] = field;
  j["lambda_rule"] = lambda_rule;
  j["indices"] = indices;
  j["k"] = k;
  j["projections"] = projections;
  j["selector"] = selector;
  j["families"] = families;
  j["seed"] = seed;
  j["tol"] = tol;
  return j;
}

ExperimentReport run_sphere_convergence(const ExperimentConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  ExperimentReport rep;
  nlohmann::json body;
  body["experiment"] = "sphere-convergence";
  body["seed"] = cfg.seed;
  body["version"] = kVersion;
  body["config"] = cfg.to_json();

  const int d = cfg.model == "projective"
                    ? (cfg.field == "R" ? 1 : cfg.field == "C" ? 2 : 4)
                    : 1;
  const bool constant_rule = cfg.lambda_rule == "constant";
  auto r_of = [&](int n) {
    double N = static_cast<double>(d) * n;
    return constant_rule ? std::sqrt(N) : std::pow(N, 0.25);
  };

  MPFamily fam = chordal_family(r_of, "chordal_rule");
  fam.indices = cfg.indices;
  ConditionReport cls = classify_family(fam, {{}, cfg.tol});
  body["results"]["chordal_family"] =
      nlohmann::json::parse(condition_report_to_json(cls));

  struct PerN {
    nlohmann::json row;
    double obs = 1.0;
    double box_upper = 1.0;
  };
  std::vector<PerN> slots(cfg.indices.size());
  bool want_box = constant_rule && cfg.model == "sphere" &&
                  std::count(cfg.projections.begin(), cfg.projections.end(), 2);

  parallel_for(
      static_cast<int>(cfg.indices.size()), cfg.threads, [&](int slot) {
        int n = cfg.indices[slot];
        double r = r_of(n);
        double lambda_n = r / std::sqrt(static_cast<double>(d) * n);
        nlohmann::json row;
        row["n"] = n;
        row["r"] = r;
        row["lambda_n"] = lambda_n;

        // chordal identity on a small full-matrix sample
        int ks = std::min(cfg.k, 200);
        MPFunction chord = MPFunction::chordal(r);
        double iderr = 0.0, oracle_gap = 0.0;
        if (cfg.model == "sphere") {
          PointCloud cloud = sphere_cloud(n + 1, r, ks, cfg.seed);
          FiniteMMSpace geo =
              space_from_cloud(cloud, MetricFlavor::kGeodesic, r);
          FiniteMMSpace euc =
              space_from_cloud(cloud, MetricFlavor::kEuclidean);
          for (std::size_t i = 0; i < geo.size(); ++i)
            for (std::size_t j = i + 1; j < geo.size(); ++j)
              iderr = std::max(iderr,
                               std::abs(euc.d(i, j) - chord(geo.d(i, j))));
          check_space(geo, substream(cfg.seed, 50 + n));
        } else {
          PointCloud cloud = sphere_cloud(d * (n + 1), r, ks, cfg.seed);
          FiniteMMSpace geo =
              quotient_space_from_cloud(cloud, d, MetricFlavor::kGeodesic, r);
          FiniteMMSpace euc =
              quotient_space_from_cloud(cloud, d, MetricFlavor::kEuclidean, r);
          for (std::size_t i = 0; i < geo.size(); ++i)
            for (std::size_t j = i + 1; j < geo.size(); ++j)
              iderr = std::max(iderr,
                               std::abs(euc.d(i, j) - chord(geo.d(i, j))));
          for (int p = 0; p < 10; ++p) {
            std::size_t i = (p * 7) % geo.size();
            std::size_t j = (i + 1 + p) % geo.size();
            if (i == j) continue;
            double oracle = quotient_dist_grid_oracle(
                cloud.row(i), cloud.row(j), d, MetricFlavor::kEuclidean, r);
            oracle_gap =
                std::max(oracle_gap, std::abs(oracle - euc.d(i, j)));
          }
          check_space(geo, substream(cfg.seed, 50 + n));
        }
        row["chordal_identity_max_err"] = iderr;
        row["quotient_oracle_gap"] = oracle_gap;

        PerN out;
        if (cfg.model == "sphere") {
          // shared per-point streams across n: common random numbers
          PointCloud big = sphere_cloud(n + 1, r, cfg.k, cfg.seed);
          std::vector<double> obs(cfg.k);
          for (int i = 0; i < cfg.k; ++i) obs[i] = big.row(i)[0];
          double prok;
          if (constant_rule) {
            // tag 0 = the same per-point streams as the sphere cloud, so the
            // reference sample is CRN-coupled and shared sampling noise
            // cancels; the value isolates the sphere-vs-Gaussian discrepancy
            PointCloud ref = gaussian_cloud(1, 1.0, cfg.k, cfg.seed, 0);
            std::vector<double> gv(ref.coords.begin(), ref.coords.end());
            prok = prokhorov_line(atoms_of(obs), atoms_of(gv));
          } else {
            prok = prokhorov_line(atoms_of(obs), {{0.0, 1.0}});
          }
          row["observable_prokhorov"] = prok;
          row["observable_prokhorov_method"] = "1d_sweep_bisection";
          out.obs = prok;

          if (want_box) {
            PointCloud proj2 = project_cloud(big, 2);
            PointCloud gref = gaussian_cloud(2, 1.0, cfg.k, cfg.seed, 103);
            FiniteMMSpace sphere2 =
                space_from_cloud(proj2, MetricFlavor::kEuclidean);
            FiniteMMSpace gauss2 =
                space_from_cloud(gref, MetricFlavor::kEuclidean);
            BoxBracket br = box_estimate(sphere2, gauss2, 60000,
                                         substream(cfg.seed, 7000 + n));
            double mu = matched_cloud_upper(proj2, gref, sphere2, gauss2,
                                            substream(cfg.seed, 8000 + n));
            if (mu < br.upper) {
              br.upper = mu;
              br.method = "coord_matched_alignment";
            }
            row["box2"] = bracket_json(br);
            out.box_upper = br.upper;
          }
        }
        out.row = std::move(row);
        slots[slot] = std::move(out);
      });

  body["results"]["per_n"] = nlohmann::json::array();
  for (auto& s : slots) body["results"]["per_n"].push_back(s.row);

  nlohmann::json verdicts;
  double max_iderr = 0.0, max_gap = 0.0;
  for (auto& s : slots) {
    max_iderr = std::max(max_iderr,
                         s.row["chordal_identity_max_err"].get<double>());
    max_gap =
        std::max(max_gap, s.row["quotient_oracle_gap"].get<double>());
  }
  verdicts["chordal_identity"] = max_iderr <= 1e-9;
  verdicts["chordal_identity_tol"] = 1e-9;
  if (cfg.model == "projective") {
    verdicts["quotient_oracle"] = max_gap <= 1e-6;
    verdicts["quotient_oracle_tol"] = 1e-6;
  }
  if (constant_rule) {
    verdicts["family_abd"] = cls.a.state == Verdict::kHolds &&
                             cls.b.state == Verdict::kHolds &&
                             cls.d.state == Verdict::kHolds;
  }
  if (cfg.model == "sphere") {
    bool decreasing = true;
    for (std::size_t t = 1; t < slots.size(); ++t)
      if (slots[t].obs >= slots[t - 1].obs) decreasing = false;
    verdicts["observable_decreasing"] = decreasing;
    verdicts["observable_final"] = slots.back().obs;
    verdicts["observable_final_small"] = slots.back().obs <= 0.06;
    verdicts["observable_tol"] = 0.06;
    if (want_box) {
      PointCloud ca = gaussian_cloud(2, 1.0, cfg.k, cfg.seed, 103);
      PointCloud cb = gaussian_cloud(2, 1.0, cfg.k, cfg.seed, 107);
      FiniteMMSpace gA = space_from_cloud(ca, MetricFlavor::kEuclidean);
      FiniteMMSpace gB = space_from_cloud(cb, MetricFlavor::kEuclidean);
      BoxBracket base =
          box_estimate(gA, gB, 60000, substream(cfg.seed, 7777));
      double mu =
          matched_cloud_upper(ca, cb, gA, gB, substream(cfg.seed, 8777));
      if (mu < base.upper) {
        base.upper = mu;
        base.method = "coord_matched_alignment";
      }
      body["results"]["box2_baseline"] = bracket_json(base);
      verdicts["box_vs_baseline"] =
          slots.back().box_upper <= 2.0 * base.upper;
    }
  }
  body["verdicts"] = verdicts;
  rep.body = finish(std::move(body), rep, t0, cfg.threads);
  return rep;
}

ExperimentReport run_counterexample(const ExperimentConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  ExperimentReport rep;
  nlohmann::json body;
  body["experiment"] = "counterexample";
  body["seed"] = cfg.seed;
  body["version"] = kVersion;
  body["config"] = cfg.to_json();
  nlohmann::json verdicts;
  nlohmann::json results;
  const std::string& sel = cfg.selector;

  if (sel == "fn1" || sel == "fn2" || sel == "fn3" || sel == "identity") {
    MPFamily fam = builtin_family(sel);
    ConditionReport cls = classify_family(fam, {{}, cfg.tol});
    results["classification"] =
        nlohmann::json::parse(condition_report_to_json(cls));
    if (sel == "fn1") {
      verdicts["ii_holds"] = cls.ii.state == Verdict::kHolds;
      verdicts["i_fails"] = cls.i.state == Verdict::kFails;
    } else if (sel == "fn2") {
      verdicts["b_holds"] = cls.b.state == Verdict::kHolds;
      verdicts["ii_fails"] = cls.ii.state == Verdict::kFails;
      verdicts["ii_witness_s"] = cls.ii.witness_s;
      verdicts["ii_witness_value"] = cls.ii.witness_value;
    } else if (sel == "fn3") {
      verdicts["iii_holds"] = cls.iii.state == Verdict::kHolds;
      verdicts["b_fails"] = cls.b.state == Verdict::kFails;
      verdicts["b_witness_s"] = cls.b.witness_s;
      verdicts["b_witness_value"] = cls.b.witness_value;
    }
  }

  if (sel == "fn2" || sel == "identity") {
    // Prop "limsup necessity" obstruction: sup F_n = 3, sup F = 2,
    // eta = 1/2, probe ({0, sup F + eta})
    PyramidApprox plain = two_point_chain({0.5, 1.0, 1.5, 2.0, 3.0});
    FiniteMMSpace probe = two_point(2.5);
    BoxBracket vs_plain = dist_to_pyramid(probe, plain, 100000, cfg.seed);
    results["probe_vs_untransformed"] = bracket_json(vs_plain);
    if (sel == "fn2") {
      PyramidApprox capped = transform_pyramid(plain, MPFunction::cap(2.0));
      BoxBracket vs_capped =
          dist_to_pyramid(probe, capped, 100000, cfg.seed);
      results["probe_vs_transformed"] = bracket_json(vs_capped);
      verdicts["obstruction_lower"] = vs_capped.lower >= 0.25;
      verdicts["untransformed_upper_zero"] = vs_plain.upper <= 1e-9;
    } else {
      verdicts["obstruction_absent"] = vs_plain.upper <= 1e-9;
    }
  }

  if (sel == "liminf") {
    // fn3 family along s_n = n + 3.5: F_n(s_n) = 1 < sup F = 2, so the
    // transformed spaces converge while the sources run off to infinity
    nlohmann::json rows = nlohmann::json::array();
    FiniteMMSpace limit = two_point(1.0);
    double worst_upper = 0.0;
    std::vector<FiniteMMSpace> sources;
    for (int n : cfg.indices) {
      double s_n = n + 3.5;
      FiniteMMSpace Xn = two_point(s_n);
      FiniteMMSpace Fn_Xn = transform_space(Xn, MPFunction::fn3(n));
      BoxBracket br = box_estimate(Fn_Xn, limit, 50000, cfg.seed);
      nlohmann::json row;
      row["n"] = n;
      row["s_n"] = s_n;
      row["transformed_sep"] = Fn_Xn.size() > 1 ? Fn_Xn.d(0, 1) : 0.0;
      row["bracket_vs_limit"] = bracket_json(br);
      rows.push_back(row);
      worst_upper = std::max(worst_upper, br.upper);
      sources.push_back(std::move(Xn));
    }
    double min_pair_lower = 1.0;
    for (std::size_t i = 0; i + 1 < sources.size(); ++i)
      min_pair_lower = std::min(
          min_pair_lower, box_lower_dd(sources[i], sources[i + 1]));
    results["liminf_rows"] = rows;
    results["source_min_pairwise_lower"] = min_pair_lower;
    verdicts["transformed_converges"] = worst_upper <= 1e-9;
    verdicts["sources_not_cauchy"] = min_pair_lower >= 0.2;
  }

  if (sel == "ptwise") {
    // Prop "pointwise" two-point construction: ({0, s_i}) with s_i -> inf
    std::vector<PyramidApprox> seq;
    std::vector<int> idx;
    double s = 2.0;
    for (std::size_t i = 0; i < std::max<std::size_t>(cfg.indices.size(), 3);
         ++i, s *= 2.0) {
      seq.push_back(two_point_chain({0.0, s}));
      idx.push_back(static_cast<int>(i));
    }
    std::vector<FiniteMMSpace> probes = {two_point(1.0), four_point_unit()};
    WeakConvergenceDiagnostic diag = weak_convergence_probe(
        seq, idx, probes, 50000, cfg.seed, cfg.tol);
    nlohmann::json dj = nlohmann::json::array();
    for (auto& p : diag.probes) {
      nlohmann::json pj;
      pj["label"] = p.label;
      pj["verdict"] = p.verdict;
      pj["inf_lower"] = p.inf_lower;
      pj["trajectory"] = nlohmann::json::array();
      for (auto& b : p.trajectory) pj["trajectory"].push_back(bracket_json(b));
      dj.push_back(pj);
    }
    results["diagnostic"] = dj;
    verdicts["dominated_probe_to_zero"] = diag.probes[0].verdict == "to_zero";
    verdicts["fat_probe_bounded_away"] =
        diag.probes[1].verdict == "bounded_away";
  }

  body["results"] = results;
  body["verdicts"] = verdicts;
  rep.body = finish(std::move(body), rep, t0, cfg.threads);
  return rep;
}

ExperimentReport run_condition_matrix(const ExperimentConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  ExperimentReport rep;
  nlohmann::json body;
  body["experiment"] = "condition-matrix";
  body["seed"] = cfg.seed;
  body["version"] = kVersion;
  body["config"] = cfg.to_json();
  nlohmann::json matrix = nlohmann::json::array();
  std::vector<nlohmann::json> slots(cfg.families.size());

  parallel_for(static_cast<int>(cfg.families.size()), cfg.threads,
               [&](int slot) {
                 MPFamily fam = builtin_family(cfg.families[slot]);
                 ConditionReport cls = classify_family(fam, {{}, cfg.tol});
                 nlohmann::json row;
                 row["family"] = cfg.families[slot];
                 row["report"] =
                     nlohmann::json::parse(condition_report_to_json(cls));
                 auto holds = [](const ConditionVerdict& v) {
                   return v.state == Verdict::kHolds;
                 };
                 nlohmann::json sets = nlohmann::json::array();
                 if (holds(cls.a) && holds(cls.b) && holds(cls.c))
                   sets.push_back("(a)+(b)+(c): box-convergence transfer");
                 if (holds(cls.a) && holds(cls.b) && holds(cls.d))
                   sets.push_back("(a)+(b)+(d): weak-convergence transfer");
                 row["hypothesis_sets"] = sets;
                 slots[slot] = std::move(row);
               });
  for (auto& row : slots) matrix.push_back(std::move(row));
  body["results"]["matrix"] = matrix;
  body["verdicts"] = nlohmann::json::object();
  rep.body = finish(std::move(body), rep, t0, cfg.threads);
  return rep;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  if (cfg.experiment == "sphere-convergence")
    return run_sphere_convergence(cfg);
  if (cfg.experiment == "counterexample") return run_counterexample(cfg);
  if (cfg.experiment == "condition-matrix") return run_condition_matrix(cfg);
  throw ConfigError("unknown experiment: " + cfg.experiment);
}

std::string report_metrics_csv(const ExperimentReport& rep) {
  std::ostringstream out;
  out << "index,metric,value\n";
  out.precision(17);
  const auto& body = rep.body;
  if (body.contains("results") && body["results"].contains("per_n")) {
    for (const auto& row : body["results"]["per_n"]) {
      int n = row.value("n", 0);
      for (auto& [key, v] : row.items()) {
        if (v.is_number() && key != "n")
          out << n << "," << key << "," << v.get<double>() << "\n";
        if (v.is_object() && v.contains("upper")) {
          out << n << "," << key << "_upper," << v["upper"].get<double>()
              << "\n";
          out << n << "," << key << "_lower," << v["lower"].get<double>()
              << "\n";
        }
      }
    }
  }
  return out.str();
}

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write file: " + path);
  out << text;
}

std::uint64_t env_seed(std::uint64_t fallback) {
  if (const char* e = std::getenv("MMGEO_SEED")) {
    try {
      return std::stoull(e);
    } catch (...) {
      throw ConfigError("MMGEO_SEED is not an integer");
    }
  }
  return fallback;
}

FiniteMMSpace load_space(const std::string& path) {
  std::string text = slurp(path);
  if (path.size() > 4 && path.substr(path.size() - 4) == ".csv")
    return space_from_csv(text);
  return space_from_json(text);
}

int check_expectations(const nlohmann::json& verdicts,
                       const std::vector<std::string>& expects) {
  for (const std::string& e : expects) {
    auto pos = e.find('=');
    if (pos == std::string::npos)
      throw ConfigError("--expect wants name=true|false, got: " + e);
    std::string name = e.substr(0, pos);
    std::string want = e.substr(pos + 1);
    if (!verdicts.contains(name))
      throw ConfigError("no such verdict: " + name);
    bool got = verdicts[name].is_boolean()
                   ? verdicts[name].get<bool>()
                   : verdicts[name].dump() == want;
    if (verdicts[name].is_boolean()) {
      if ((want == "true") != got) return 2;
    } else if (!got) {
      return 2;
    }
  }
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"metric measure geometry toolkit"};
  app.require_subcommand(1);

  // validate-mpf
  auto* vmpf = app.add_subcommand("validate-mpf",
                                  "check metric preserving conditions");
  std::string vm_file, vm_builtin;
  bool vm_expect_preserving = false;
  vmpf->add_option("--file", vm_file, "piecewise-linear function JSON");
  vmpf->add_option("--builtin", vm_builtin, "builtin catalog name");
  vmpf->add_flag("--expect-preserving", vm_expect_preserving,
                 "exit 2 unless the function is accepted");

  // transform
  auto* tr = app.add_subcommand("transform", "apply F to a space");
  std::string tr_space, tr_fn, tr_builtin, tr_out;
  tr->add_option("--space", tr_space, "space JSON/CSV file")->required();
  tr->add_option("--function", tr_fn, "function JSON file");
  tr->add_option("--builtin", tr_builtin, "builtin catalog name");
  tr->add_option("--out", tr_out, "output path (default stdout)");

  // dist
  auto* ds = app.add_subcommand("dist", "distances between inputs");
  std::string ds_metric = "prokhorov", ds_a, ds_b;
  std::uint64_t ds_seed = 0;
  long ds_budget = 200000;
  ds->add_option("--metric", ds_metric, "prokhorov | kyfan | box");
  ds->add_option("--a", ds_a, "first input file")->required();
  ds->add_option("--b", ds_b, "second input file");
  ds->add_option("--seed", ds_seed, "estimator seed");
  ds->add_option("--budget", ds_budget, "search budget");

  // sample
  auto* sm = app.add_subcommand("sample", "draw a model space");
  std::string sm_spec, sm_out;
  sm->add_option("--spec", sm_spec, "ModelSpec JSON file")->required();
  sm->add_option("--out", sm_out, "output path (default stdout)");

  // pyramid
  auto* py = app.add_subcommand("pyramid", "build or verify approximations");
  std::string py_verify, py_out, py_field = "none";
  double py_lambda = 1.0;
  std::vector<int> py_dims;
  int py_samples = 100;
  std::uint64_t py_seed = 0;
  py->add_option("--verify", py_verify, "pyramid JSON to verify");
  py->add_option("--lambda", py_lambda, "Gaussian standard deviation");
  py->add_option("--dims", py_dims, "increasing dimension chain");
  py->add_option("--samples", py_samples, "shared sample count");
  py->add_option("--seed", py_seed, "sampler seed");
  py->add_option("--field", py_field, "R | C | H | none (quotient)");
  py->add_option("--out", py_out, "output path (default stdout)");

  // experiment
  auto* ex = app.add_subcommand("experiment", "run an experiment");
  std::string ex_name, ex_config, ex_out, ex_csv;
  std::uint64_t ex_seed = 0;
  bool ex_seed_set = false;
  int ex_threads = 1;
  std::vector<std::string> ex_expect;
  ex->add_option("name", ex_name,
                 "sphere-convergence | counterexample | condition-matrix");
  ex->add_option("--config", ex_config, "config JSON file");
  ex->add_option_function<std::uint64_t>(
      "--seed",
      [&](const std::uint64_t& v) {
        ex_seed = v;
        ex_seed_set = true;
      },
      "seed override (else config, else MMGEO_SEED)");
  ex->add_option("--out", ex_out, "report.json path");
  ex->add_option("--csv", ex_csv, "metrics.csv path");
  ex->add_option("--threads", ex_threads, "worker threads");
  ex->add_option("--expect", ex_expect, "verdict assertions name=true|false");

  // report
  auto* rp = app.add_subcommand("report", "summarize a report file");
  std::string rp_in;
  rp->add_option("--in", rp_in, "report.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (vmpf->parsed()) {
      MPFunction F = !vm_file.empty()
                         ? MPFunction::from_json(slurp(vm_file))
                         : MPFunction::builtin(vm_builtin);
      ConditionReport repf = validate_mpf(F);
      std::printf("%s\n", condition_report_to_json(repf).c_str());
      if (vm_expect_preserving && !repf.metric_preserving) return 2;
      return 0;
    }
    if (tr->parsed()) {
      FiniteMMSpace X = load_space(tr_space);
      MPFunction F = !tr_fn.empty() ? MPFunction::from_json(slurp(tr_fn))
                                    : MPFunction::builtin(tr_builtin);
      std::string out = space_to_json(transform_space(X, F));
      if (tr_out.empty())
        std::printf("%s\n", out.c_str());
      else
        spit(tr_out, out + "\n");
      return 0;
    }
    if (ds->parsed()) {
      if (ds_metric == "kyfan") {
        nlohmann::json j = nlohmann::json::parse(slurp(ds_a));
        WeightedDeviation dev;
        for (auto& row : j.at("atoms"))
          dev.atoms.emplace_back(row[0].get<double>(), row[1].get<double>());
        std::printf("%.12g\n", ky_fan(dev));
        return 0;
      }
      FiniteMMSpace A = load_space(ds_a);
      FiniteMMSpace B = load_space(ds_b);
      if (ds_metric == "prokhorov") {
        if (A.size() != B.size() || A.dist != B.dist)
          throw ConfigError(
              "prokhorov needs two measures on the same metric space "
              "(identical dist matrices)");
        std::printf("%.12g\n",
                    prokhorov(A.dist, A.size(), A.weights, B.weights));
        return 0;
      }
      if (ds_metric == "box") {
        std::uint64_t seed = ds_seed ? ds_seed : env_seed(1);
        BoxBracket br = box_estimate(A, B, ds_budget, seed);
        std::printf("%s\n", bracket_to_json(br).c_str());
        return 0;
      }
      throw ConfigError("unknown metric: " + ds_metric);
    }
    if (sm->parsed()) {
      ModelSpec spec = model_spec_from_json(slurp(sm_spec));
      std::string out = space_to_json(sample_model(spec));
      if (sm_out.empty())
        std::printf("%s\n", out.c_str());
      else
        spit(sm_out, out + "\n");
      return 0;
    }
    if (py->parsed()) {
      if (!py_verify.empty()) {
        pyramid_from_json(slurp(py_verify));
        std::printf("pyramid ok\n");
        return 0;
      }
      if (py_dims.empty()) throw ConfigError("--dims required for build");
      int field_dim = py_field == "none" ? 0
                      : py_field == "R"  ? 1
                      : py_field == "C"  ? 2
                      : py_field == "H"
                          ? 4
                          : throw ConfigError("bad field: " + py_field);
      std::uint64_t seed = py_seed ? py_seed : env_seed(1);
      PyramidApprox P = build_gaussian_pyramid_approx(
          py_lambda, py_dims, py_samples, seed, field_dim);
      std::string out = pyramid_to_json(P);
      if (py_out.empty())
        std::printf("%s\n", out.c_str());
      else
        spit(py_out, out + "\n");
      return 0;
    }
    if (ex->parsed()) {
      ExperimentConfig cfg;
      if (!ex_config.empty()) {
        cfg = ExperimentConfig::from_json(slurp(ex_config));
      } else {
        cfg.experiment = ex_name;
      }
      if (!ex_name.empty()) cfg.experiment = ex_name;
      if (ex_seed_set)
        cfg.seed = ex_seed;
      else if (ex_config.empty())
        cfg.seed = env_seed(cfg.seed);
      cfg.threads = ex_threads;
      ExperimentReport repx = run_experiment(cfg);
      std::string out = repx.to_json();
      if (ex_out.empty())
        std::printf("%s\n", out.c_str());
      else
        spit(ex_out, out + "\n");
      if (!ex_csv.empty()) spit(ex_csv, report_metrics_csv(repx));
      return check_expectations(repx.body["verdicts"], ex_expect);
    }
    if (rp->parsed()) {
      nlohmann::json j = nlohmann::json::parse(slurp(rp_in));
      std::printf("experiment: %s\nseed: %s\nversion: %s\n",
                  j.value("experiment", std::string("?")).c_str(),
                  j.contains("seed") ? j["seed"].dump().c_str() : "?",
                  j.value("version", std::string("?")).c_str());
      if (j.contains("verdicts"))
        for (auto& [k, v] : j["verdicts"].items())
          std::printf("  %s: %s\n", k.c_str(), v.dump().c_str());
      return 0;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}

}  // namespace mmg
