#include "mmg/boxdist.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "mmg/probmetrics.hpp"
#include "mmg/rng.hpp"

namespace mmg {

namespace {

constexpr double kTol = 1e-9;

double clamp01(double v) { return std::min(std::max(v, 0.0), 1.0); }

// Deterministic symmetry: canonical argument order by (size, dist, weights).
bool canonical_before(const FiniteMMSpace& A, const FiniteMMSpace& B) {
  if (A.size() != B.size()) return A.size() < B.size();
  if (A.dist != B.dist) return A.dist < B.dist;
  return A.weights <= B.weights;
}

struct Objective {
  // eps of an interval assignment with drops, over uniform-length intervals
  static double eval(const FiniteMMSpace& X, const FiniteMMSpace& Y,
                     const std::vector<std::size_t>& to_x,
                     const std::vector<std::size_t>& to_y,
                     const std::vector<bool>& drop, double piece) {
    std::size_t R = to_x.size();
    double kept = 0.0, distortion = 0.0;
    for (std::size_t t = 0; t < R; ++t) {
      if (drop[t]) continue;
      kept += piece;
      for (std::size_t u = t + 1; u < R; ++u) {
        if (drop[u]) continue;
        double g = std::abs(X.d(to_x[t], to_x[u]) - Y.d(to_y[t], to_y[u]));
        distortion = std::max(distortion, g);
      }
    }
    return clamp01(std::max(1.0 - kept, distortion));
  }
};

}  // namespace

double box_upper_from_alignment(const FiniteMMSpace& X, const FiniteMMSpace& Y,
                                const ParameterAlignment& align,
                                const std::vector<bool>& drop) {
  std::size_t R = align.lengths.size();
  if (align.to_x.size() != R || align.to_y.size() != R || drop.size() != R)
    throw InvalidAlignment("alignment arrays disagree in length");
  std::vector<double> wx(X.size(), 0.0), wy(Y.size(), 0.0);
  double total = 0.0;
  for (std::size_t t = 0; t < R; ++t) {
    double len = align.lengths[t];
    if (len < -kTol) throw InvalidAlignment("negative interval length");
    if (align.to_x[t] >= X.size() || align.to_y[t] >= Y.size())
      throw InvalidAlignment("interval assigned out of range");
    wx[align.to_x[t]] += len;
    wy[align.to_y[t]] += len;
    total += len;
  }
  if (std::abs(total - 1.0) > kTol)
    throw InvalidAlignment("interval lengths do not cover [0,1)");
  for (std::size_t i = 0; i < X.size(); ++i)
    if (std::abs(wx[i] - X.weights[i]) > kTol)
      throw InvalidAlignment("alignment does not push L1 to m_X");
  for (std::size_t j = 0; j < Y.size(); ++j)
    if (std::abs(wy[j] - Y.weights[j]) > kTol)
      throw InvalidAlignment("alignment does not push L1 to m_Y");

  double kept = 0.0, distortion = 0.0;
  for (std::size_t t = 0; t < R; ++t) {
    if (drop[t]) continue;
    kept += align.lengths[t];
    for (std::size_t u = t + 1; u < R; ++u) {
      if (drop[u]) continue;
      double g = std::abs(X.d(align.to_x[t], align.to_x[u]) -
                          Y.d(align.to_y[t], align.to_y[u]));
      distortion = std::max(distortion, g);
    }
  }
  return clamp01(std::max(1.0 - kept, distortion));
}

double box_upper_from_cert(const FiniteMMSpace& X, const FiniteMMSpace& Y,
                           const EpsMMIsoCert& cert) {
  if (!verify_mm_iso_cert(X, Y, cert))
    throw CertRejected("eps-mm-iso certificate failed verification");
  return clamp01(3.0 * cert.eps);
}

double box_lower_dd(const FiniteMMSpace& X, const FiniteMMSpace& Y) {
  auto ax = distance_distribution(X).atoms;
  auto ay = distance_distribution(Y).atoms;
  return prokhorov_line(std::move(ax), std::move(ay)) / 2.0;
}

double box_oracle_tiny(const FiniteMMSpace& X, const FiniteMMSpace& Y,
                       int refinement) {
  if (refinement < 1 || refinement > 8)
    throw TooLarge("oracle refinement must be in [1, 8]");
  std::size_t nx = X.size(), ny = Y.size();
  std::size_t R = static_cast<std::size_t>(refinement);
  if (R % nx != 0 || R % ny != 0)
    throw TooLarge("sizes must divide the refinement");
  for (double w : X.weights)
    if (std::abs(w - 1.0 / nx) > kTol)
      throw TooLarge("oracle needs uniform weights");
  for (double w : Y.weights)
    if (std::abs(w - 1.0 / ny) > kTol)
      throw TooLarge("oracle needs uniform weights");

  double piece = 1.0 / R;
  // canonical X block assignment is WLOG: intervals all have length 1/R,
  // so any X assignment is absorbed by relabeling, i.e. by the Y permutation
  std::vector<std::size_t> to_x(R), perm(R);
  for (std::size_t t = 0; t < R; ++t) to_x[t] = t / (R / nx);
  for (std::size_t t = 0; t < R; ++t) perm[t] = t / (R / ny);

  double best = 1.0;
  std::vector<double> pairgap(R * R, 0.0);
  std::vector<double> maxd(std::size_t{1} << R, 0.0);
  do {
    for (std::size_t t = 0; t < R; ++t)
      for (std::size_t u = 0; u < R; ++u)
        pairgap[t * R + u] =
            std::abs(X.d(to_x[t], to_x[u]) - Y.d(perm[t], perm[u]));
    std::size_t masks = std::size_t{1} << R;
    for (std::size_t mask = 1; mask < masks; ++mask) {
      std::size_t low = static_cast<std::size_t>(std::countr_zero(mask));
      std::size_t rest = mask & (mask - 1);
      double m = maxd[rest];
      for (std::size_t rem = rest; rem; rem &= rem - 1) {
        std::size_t u = static_cast<std::size_t>(std::countr_zero(rem));
        m = std::max(m, pairgap[low * R + u]);
      }
      maxd[mask] = m;
      double kept = piece * std::popcount(mask);
      best = std::min(best, std::max(1.0 - kept, m));
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return clamp01(best);
}

namespace {

// Smallest D <= cap with all weights integer multiples of 1/D.
int common_denominator(const FiniteMMSpace& X, const FiniteMMSpace& Y,
                       int cap) {
  for (int D = 1; D <= cap; ++D) {
    bool ok = true;
    for (double w : X.weights)
      if (std::abs(w * D - std::round(w * D)) > 1e-9 * D) ok = false;
    for (double w : Y.weights)
      if (std::abs(w * D - std::round(w * D)) > 1e-9 * D) ok = false;
    if (ok) return D;
  }
  return 0;
}

std::vector<std::size_t> block_assignment(const FiniteMMSpace& X, int D) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < X.size(); ++i) {
    int c = static_cast<int>(std::round(X.weights[i] * D));
    for (int t = 0; t < c; ++t) out.push_back(i);
  }
  return out;
}

struct AnnealResult {
  double eps = 1.0;
  std::vector<std::size_t> to_x, to_y;
  std::vector<bool> drop;
};

AnnealResult anneal_alignment(const FiniteMMSpace& X, const FiniteMMSpace& Y,
                              int D, long budget, std::uint64_t seed) {
  AnnealResult best;
  std::size_t R = static_cast<std::size_t>(D);
  double piece = 1.0 / D;
  std::vector<std::size_t> base_x = block_assignment(X, D);
  std::vector<std::size_t> base_y = block_assignment(Y, D);
  long iters = std::max<long>(500, std::min<long>(budget / 8, 20000));

  for (int restart = 0; restart < 8; ++restart) {
    Philox rng(seed, substream(0x626f78, restart));
    std::vector<std::size_t> to_y = base_y;
    if (restart > 0)
      for (std::size_t t = R; t > 1; --t)
        std::swap(to_y[t - 1], to_y[rng.next_u64() % t]);
    std::vector<bool> drop(R, false);
    double cur = Objective::eval(X, Y, base_x, to_y, drop, piece);
    double cbest = cur;
    std::vector<std::size_t> best_y = to_y;
    std::vector<bool> best_drop = drop;
    double temp = 0.5;
    double cool = std::pow(1e-3 / temp, 1.0 / iters);
    for (long it = 0; it < iters; ++it, temp *= cool) {
      bool toggle = (rng.next_u32() & 3u) == 0;  // 1 in 4 moves flips a drop
      std::size_t a = rng.next_u64() % R, b = rng.next_u64() % R;
      if (toggle) {
        drop[a] = !drop[a];
      } else {
        std::swap(to_y[a], to_y[b]);
      }
      double cand = Objective::eval(X, Y, base_x, to_y, drop, piece);
      bool accept = cand <= cur ||
                    rng.next_double() < std::exp((cur - cand) / temp);
      if (accept) {
        cur = cand;
        if (cur < cbest) {
          cbest = cur;
          best_y = to_y;
          best_drop = drop;
        }
      } else {
        if (toggle)
          drop[a] = !drop[a];
        else
          std::swap(to_y[a], to_y[b]);
      }
    }
    if (cbest < best.eps) {
      best.eps = cbest;
      best.to_x = base_x;
      best.to_y = best_y;
      best.drop = best_drop;
    }
  }
  return best;
}

// Same metric, different weights: align along an optimal-eps coupling and
// drop the residual pairs with d > eps. Distortion on kept pairs is at
// most 2 eps by the triangle inequality, so the bound is <= 2 prok(mu, nu).
double same_metric_upper(const FiniteMMSpace& X, const FiniteMMSpace& Y) {
  Coupling c;
  double eps =
      prokhorov_with_witness(X.dist, X.size(), X.weights, Y.weights, c);
  ParameterAlignment align;
  std::vector<bool> drop;
  for (std::size_t i = 0; i < c.rows; ++i)
    for (std::size_t j = 0; j < c.cols; ++j) {
      double m = c.at(i, j);
      if (m <= 0.0) continue;
      align.lengths.push_back(m);
      align.to_x.push_back(i);
      align.to_y.push_back(j);
      drop.push_back(X.d(i, j) > eps + 1e-12);
    }
  return box_upper_from_alignment(X, Y, align, drop);
}

// Uniform same-size spaces: bijection alignment seeded by a mean-distance
// sort, polished by seeded transposition descent on the summed squared
// distortion, then greedy interval drops.
double greedy_bijection_upper(const FiniteMMSpace& X, const FiniteMMSpace& Y,
                              long budget, std::uint64_t seed) {
  std::size_t n = X.size();
  auto rank_by_mean = [](const FiniteMMSpace& S) {
    std::size_t n = S.size();
    std::vector<double> mean(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) mean[i] += S.d(i, j);
      mean[i] /= n;
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return mean[a] < mean[b];
                     });
    return order;
  };
  std::vector<std::size_t> ox = rank_by_mean(X), oy = rank_by_mean(Y);
  std::vector<std::size_t> match(n);  // X index -> Y index
  for (std::size_t k = 0; k < n; ++k) match[ox[k]] = oy[k];

  // descent on sum of squared distortions; O(n) delta per transposition
  long iters = std::min<long>(budget, 60000);
  Philox rng(seed, substream(0x626a, 1));
  auto pair_cost = [&](std::size_t i, std::size_t j) {
    double g = X.d(i, j) - Y.d(match[i], match[j]);
    return g * g;
  };
  for (long it = 0; it < iters; ++it) {
    std::size_t a = rng.next_u64() % n, b = rng.next_u64() % n;
    if (a == b) continue;
    double before = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == a || j == b) continue;
      before += pair_cost(a, j) + pair_cost(b, j);
    }
    std::swap(match[a], match[b]);
    double after = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == a || j == b) continue;
      after += pair_cost(a, j) + pair_cost(b, j);
    }
    if (after > before) std::swap(match[a], match[b]);
  }

  // greedy drops: remove points in order of their worst remaining gap
  std::vector<bool> active(n, true);
  double best = 1.0;
  std::vector<double> rowmax(n, 0.0);
  auto recompute = [&]() {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      rowmax[i] = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (!active[j] || j == i) continue;
        double g = std::abs(X.d(i, j) - Y.d(match[i], match[j]));
        rowmax[i] = std::max(rowmax[i], g);
      }
      m = std::max(m, rowmax[i]);
    }
    return m;
  };
  std::size_t dropped = 0;
  std::size_t max_drops = n / 2;
  while (true) {
    double distortion = recompute();
    double eps = std::max(static_cast<double>(dropped) / n, distortion);
    best = std::min(best, eps);
    if (dropped >= max_drops) break;
    if (static_cast<double>(dropped + 1) / n >= best) break;
    std::size_t worst = n;
    double wv = -1.0;
    for (std::size_t i = 0; i < n; ++i)
      if (active[i] && rowmax[i] > wv) {
        wv = rowmax[i];
        worst = i;
      }
    if (worst == n) break;
    active[worst] = false;
    ++dropped;
  }
  return clamp01(best);
}

struct CertSearchResult {
  double bound = 1.0;
  EpsMMIsoCert cert;
  bool found = false;
};

// Best 3 eps certificate over a searched point map X -> Y with greedy
// domain drops.
CertSearchResult cert_for_map(const FiniteMMSpace& X, const FiniteMMSpace& Y,
                              const std::vector<std::size_t>& map) {
  std::size_t n = X.size();
  std::vector<bool> in(n, true);
  double dropped_mass = 0.0;
  CertSearchResult out;
  for (std::size_t step = 0; step <= n; ++step) {
    double distortion = 0.0;
    std::size_t worst = n;
    double worst_row = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!in[i]) continue;
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (!in[j] || j == i) continue;
        row = std::max(row, std::abs(X.d(i, j) - Y.d(map[i], map[j])));
      }
      if (row > worst_row) {
        worst_row = row;
        worst = i;
      }
      distortion = std::max(distortion, row);
    }
    auto push = pushforward_weights(X, map, Y.size());
    double prok = prokhorov(Y.dist, Y.size(), push, Y.weights);
    double eps = std::max({distortion, dropped_mass, prok});
    if (3.0 * eps < out.bound) {
      EpsMMIsoCert cert;
      cert.map = map;
      cert.eps = eps;
      for (std::size_t i = 0; i < n; ++i)
        if (in[i]) cert.domain.push_back(i);
      if (verify_mm_iso_cert(X, Y, cert)) {
        out.bound = clamp01(3.0 * eps);
        out.cert = std::move(cert);
        out.found = true;
      }
    }
    if (worst == n || dropped_mass >= 0.5) break;
    in[worst] = false;
    dropped_mass += X.weights[worst];
  }
  return out;
}

CertSearchResult cert_search(const FiniteMMSpace& X, const FiniteMMSpace& Y,
                             long budget, std::uint64_t seed) {
  std::size_t n = X.size(), m = Y.size();
  CertSearchResult best;
  double total = std::pow(static_cast<double>(m), static_cast<double>(n));
  if (total <= 20000.0) {
    std::vector<std::size_t> map(n, 0);
    while (true) {
      CertSearchResult r = cert_for_map(X, Y, map);
      if (r.found && r.bound < best.bound) best = std::move(r);
      std::size_t pos = 0;
      while (pos < n && ++map[pos] == m) map[pos++] = 0;
      if (pos == n) break;
    }
    return best;
  }
  // greedy init (nearest pushforward slot) plus coordinate descent
  Philox rng(seed, substream(0x63657274, 0));
  std::vector<std::size_t> map(n);
  for (std::size_t i = 0; i < n; ++i) map[i] = rng.next_u64() % m;
  long rounds = std::max<long>(2, std::min<long>(budget / (long)(n * m), 20));
  for (long r = 0; r < rounds; ++r) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      double bestv = 1e300;
      std::size_t bestj = map[i];
      for (std::size_t j = 0; j < m; ++j) {
        map[i] = j;
        double v = 0.0;
        for (std::size_t a = 0; a < n; ++a)
          for (std::size_t b = a + 1; b < n; ++b) {
            double g = X.d(a, b) - Y.d(map[a], map[b]);
            v += g * g;
          }
        if (v < bestv) {
          bestv = v;
          bestj = j;
        }
      }
      if (map[i] != bestj) changed = true;
      map[i] = bestj;
    }
    if (!changed) break;
  }
  CertSearchResult r = cert_for_map(X, Y, map);
  if (r.found && r.bound < best.bound) best = std::move(r);
  return best;
}

bool uniform_weights(const FiniteMMSpace& X) {
  for (double w : X.weights)
    if (std::abs(w - 1.0 / X.size()) > kTol) return false;
  return true;
}

}  // namespace

BoxBracket box_estimate(const FiniteMMSpace& X, const FiniteMMSpace& Y,
                        long budget, std::uint64_t seed) {
  const FiniteMMSpace& A = canonical_before(X, Y) ? X : Y;
  const FiniteMMSpace& B = canonical_before(X, Y) ? Y : X;
  BoxBracket out;
  out.seed = seed;
  out.lower = box_lower_dd(A, B);
  out.lower_method = "dd_prokhorov_halved";
  out.upper = 1.0;
  out.method = "drop_everything";

  auto take = [&](double v, const char* tag) {
    if (v < out.upper) {
      out.upper = v;
      out.method = tag;
    }
  };

  if (A.size() == B.size() && A.dist == B.dist) {
    if (A.weights == B.weights) {
      take(0.0, "identical");
    } else {
      take(same_metric_upper(A, B), "same_metric_coupling");
    }
  }

  int D = 0;
  std::size_t n = A.size(), m = B.size();
  if (n <= 64 && m <= 64) D = common_denominator(A, B, 64);
  if (D > 0) {
    AnnealResult r = anneal_alignment(A, B, D, budget, seed);
    take(r.eps, "alignment_annealing");
  }

  if (n == m && n > 64 && uniform_weights(A) && uniform_weights(B))
    take(greedy_bijection_upper(A, B, budget, seed), "greedy_bijection");

  if (n <= 12 && m <= 12) {
    CertSearchResult r = cert_search(A, B, budget, seed);
    if (r.found && r.bound < out.upper) {
      out.upper = r.bound;
      out.method = "map_cert_3eps";
      out.has_cert = true;
      out.cert = std::move(r.cert);
    }
  }

  out.upper = clamp01(out.upper);
  out.lower = std::min(out.lower, out.upper);
  return out;
}

std::string bracket_to_json(const BoxBracket& b) {
  nlohmann::json j;
  j["lower"] = b.lower;
  j["upper"] = b.upper;
  j["method"] = b.method;
  j["lower_method"] = b.lower_method;
  j["seed"] = b.seed;
  if (b.has_cert) {
    j["cert"]["map"] = b.cert.map;
    j["cert"]["domain"] = b.cert.domain;
    j["cert"]["eps"] = b.cert.eps;
  }
  return j.dump(2);
}

BoxBracket bracket_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  BoxBracket b;
  b.lower = j.at("lower").get<double>();
  b.upper = j.at("upper").get<double>();
  b.method = j.value("method", std::string());
  b.lower_method = j.value("lower_method", std::string());
  b.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("cert")) {
    b.has_cert = true;
    b.cert.map = j["cert"]["map"].get<std::vector<std::size_t>>();
    b.cert.domain = j["cert"]["domain"].get<std::vector<std::size_t>>();
    b.cert.eps = j["cert"]["eps"].get<double>();
  }
  return b;
}

}  // namespace mmg
