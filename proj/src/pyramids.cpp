#include "mmg/pyramids.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "mmg/models.hpp"
#include "mmg/probmetrics.hpp"
#include "mmg/rng.hpp"

namespace mmg {

void verify_pyramid(const PyramidApprox& P) {
  if (P.chain.empty()) throw InvalidPyramid("empty chain");
  if (P.witnesses.size() + 1 != P.chain.size())
    throw InvalidPyramid("need one witness per consecutive pair");
  for (std::size_t m = 0; m + 1 < P.chain.size(); ++m) {
    // witness maps chain[m+1] -> chain[m], certifying chain[m] < chain[m+1]
    if (!verify_lipschitz_cert(P.chain[m + 1], P.chain[m], P.witnesses[m])) {
      std::ostringstream msg;
      msg << "witness " << m << " is not 1-Lipschitz measure-preserving";
      throw InvalidPyramid(msg.str());
    }
  }
}

PyramidApprox pyramid_from_chain(std::vector<FiniteMMSpace> chain,
                                 std::vector<std::vector<std::size_t>> wit) {
  PyramidApprox P{std::move(chain), std::move(wit)};
  verify_pyramid(P);
  return P;
}

namespace {

// Restriction of (Y.dist, weights w) to the support of w.
FiniteMMSpace supported_sub_space(const FiniteMMSpace& Y,
                                  const std::vector<double>& w) {
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < w.size(); ++j)
    if (w[j] > 0.0) keep.push_back(j);
  FiniteMMSpace Z;
  std::size_t m = keep.size();
  Z.dist.assign(m * m, 0.0);
  for (std::size_t a = 0; a < m; ++a) {
    Z.labels.push_back(Y.labels.empty() ? std::to_string(keep[a])
                                        : Y.labels[keep[a]]);
    Z.weights.push_back(w[keep[a]]);
    for (std::size_t b = 0; b < m; ++b)
      Z.dist[a * m + b] = Y.d(keep[a], keep[b]);
  }
  return Z;
}

struct MapEval {
  double four_eps = 1.0;     // almost-Lipschitz route
  double image_upper = 1.0;  // exact domination route when excess ~ 0
};

// Evaluates a point map f : X -> Y as a pyramid-membership witness.
MapEval eval_map(const FiniteMMSpace& X, const FiniteMMSpace& Y,
                 const std::vector<std::size_t>& f, long budget,
                 std::uint64_t seed) {
  double excess = 0.0;
  std::size_t n = X.size();
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      excess = std::max(excess, Y.d(f[a], f[b]) - X.d(a, b));
  auto push = pushforward_weights(X, f, Y.size());
  double prok = prokhorov(Y.dist, Y.size(), push, Y.weights);
  MapEval out;
  out.four_eps = std::min(1.0, 4.0 * std::max(excess, prok));
  if (excess <= 1e-9) {
    // f is 1-Lipschitz, so the pushforward space lies in the pyramid
    FiniteMMSpace Z = supported_sub_space(Y, push);
    out.image_upper = box_estimate(Y, Z, budget, seed).upper;
  }
  return out;
}

double best_map_upper(const FiniteMMSpace& X, const FiniteMMSpace& Y,
                      long budget, std::uint64_t seed) {
  std::size_t n = X.size(), m = Y.size();
  double total = std::pow(static_cast<double>(m), static_cast<double>(n));
  double best = 1.0;
  if (total <= 4096.0) {
    std::vector<std::size_t> f(n, 0);
    while (true) {
      MapEval e = eval_map(X, Y, f, budget, seed);
      best = std::min({best, e.four_eps, e.image_upper});
      std::size_t pos = 0;
      while (pos < n && ++f[pos] == m) f[pos++] = 0;
      if (pos == n) break;
    }
    return best;
  }
  // coordinate descent on Lipschitz excess + pushforward mismatch
  Philox rng(seed, substream(0x7079726d, 0));
  std::vector<std::size_t> f(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = rng.next_u64() % m;
  long rounds = std::max<long>(2, std::min<long>(budget / (long)(n * m + 1), 10));
  auto surrogate = [&]() {
    double s = 0.0;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b) {
        double g = std::max(0.0, Y.d(f[a], f[b]) - X.d(a, b));
        s += g * g;
      }
    return s;
  };
  for (long rd = 0; rd < rounds; ++rd) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      double bestv = 1e300;
      std::size_t bestj = f[i];
      for (std::size_t j = 0; j < m; ++j) {
        f[i] = j;
        double v = surrogate();
        if (v < bestv) {
          bestv = v;
          bestj = j;
        }
      }
      if (f[i] != bestj) changed = true;
      f[i] = bestj;
    }
    if (!changed) break;
  }
  MapEval e = eval_map(X, Y, f, budget, seed);
  return std::min({best, e.four_eps, e.image_upper});
}

}  // namespace

BoxBracket dist_to_pyramid(const FiniteMMSpace& Y, const PyramidApprox& P,
                           long budget, std::uint64_t seed) {
  BoxBracket out;
  out.seed = seed;
  out.upper = 1.0;
  out.lower = 1.0;
  out.method = "drop_everything";
  out.lower_method = "chain_dd_heuristic";  // chain-restricted, not sound
                                            // over the full pyramid
  for (std::size_t m = 0; m < P.chain.size(); ++m) {
    const FiniteMMSpace& X = P.chain[m];
    out.lower = std::min(out.lower, box_lower_dd(Y, X));
    BoxBracket direct = box_estimate(Y, X, budget, substream(seed, m));
    if (direct.upper < out.upper) {
      out.upper = direct.upper;
      out.method = "chain_" + direct.method;
    }
    double viamap = best_map_upper(X, Y, budget, substream(seed, m + 1000));
    if (viamap < out.upper) {
      out.upper = viamap;
      out.method = "dominated_map_search";
    }
  }
  out.lower = std::min(out.lower, out.upper);
  return out;
}

WeakConvergenceDiagnostic weak_convergence_probe(
    const std::vector<PyramidApprox>& seq, const std::vector<int>& indices,
    const std::vector<FiniteMMSpace>& probes, long budget, std::uint64_t seed,
    double tol) {
  if (seq.size() != indices.size())
    throw std::invalid_argument("weak_convergence_probe: index misalignment");
  if (seq.size() < 3)
    throw std::invalid_argument("need at least 3 indices for a trend");
  WeakConvergenceDiagnostic diag;
  diag.indices = indices;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    WeakConvergenceDiagnostic::Probe probe;
    probe.label = "probe" + std::to_string(p);
    double inf_lower = 1.0;
    for (std::size_t t = 0; t < seq.size(); ++t)
      probe.trajectory.push_back(dist_to_pyramid(
          probes[p], seq[t], budget, substream(seed, p * 1000 + t)));
    bool envelope = true;
    for (std::size_t t = 1; t < probe.trajectory.size(); ++t)
      if (probe.trajectory[t].upper > probe.trajectory[t - 1].upper + tol)
        envelope = false;
    for (const auto& b : probe.trajectory)
      inf_lower = std::min(inf_lower, b.lower);
    probe.inf_lower = inf_lower;
    if (envelope && probe.trajectory.back().upper <= tol)
      probe.verdict = "to_zero";
    else if (inf_lower > tol)
      probe.verdict = "bounded_away";
    else
      probe.verdict = "inconclusive";
    diag.probes.push_back(std::move(probe));
  }
  return diag;
}

PyramidApprox build_gaussian_pyramid_approx(double lambda,
                                            const std::vector<int>& dims,
                                            int samples, std::uint64_t seed,
                                            int field_dim) {
  if (dims.empty()) throw std::invalid_argument("dims must be nonempty");
  for (std::size_t i = 1; i < dims.size(); ++i)
    if (dims[i] <= dims[i - 1])
      throw std::invalid_argument("dims must be increasing");
  int scalars = field_dim > 0 ? field_dim : 1;
  PointCloud full =
      gaussian_cloud(scalars * dims.back(), lambda, samples, seed);
  PyramidApprox P;
  for (int dim : dims) {
    PointCloud proj = project_cloud(full, scalars * dim);
    if (field_dim > 0)
      P.chain.push_back(quotient_space_from_cloud(proj, field_dim,
                                                  MetricFlavor::kEuclidean));
    else
      P.chain.push_back(space_from_cloud(proj, MetricFlavor::kEuclidean));
  }
  // shared sample: the coordinate projection is the identity on indices
  std::vector<std::size_t> ident(samples);
  for (int i = 0; i < samples; ++i) ident[i] = i;
  for (std::size_t m = 0; m + 1 < P.chain.size(); ++m)
    P.witnesses.push_back(ident);
  verify_pyramid(P);
  return P;
}

std::string pyramid_to_json(const PyramidApprox& P) {
  nlohmann::json j;
  j["chain"] = nlohmann::json::array();
  for (const auto& X : P.chain)
    j["chain"].push_back(nlohmann::json::parse(space_to_json(X)));
  j["witnesses"] = P.witnesses;
  return j.dump(2);
}

PyramidApprox pyramid_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  PyramidApprox P;
  for (const auto& s : j.at("chain"))
    P.chain.push_back(space_from_json(s.dump()));
  P.witnesses =
      j.at("witnesses").get<std::vector<std::vector<std::size_t>>>();
  verify_pyramid(P);
  return P;
}

}  // namespace mmg
