#include "mmg/probmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mmg {

namespace {

constexpr double kEdgeSlack = 1e-12;
constexpr double kFlowEps = 1e-15;

// Dinic max-flow specialized to the bipartite transport feasibility graph:
// source -> left atoms (cap mu_i) -> right atoms (cap inf on allowed pairs)
// -> sink (cap nu_j).
class Dinic {
 public:
  explicit Dinic(int n) : head_(n, -1), level_(n), it_(n), n_(n) {}

  void add_edge(int u, int v, double cap) {
    edges_.push_back({v, head_[u], cap});
    head_[u] = static_cast<int>(edges_.size()) - 1;
    edges_.push_back({u, head_[v], 0.0});
    head_[v] = static_cast<int>(edges_.size()) - 1;
  }

  double run(int s, int t) {
    double flow = 0.0;
    while (bfs(s, t)) {
      it_ = head_;
      double f;
      while ((f = dfs(s, t, std::numeric_limits<double>::infinity())) > kFlowEps)
        flow += f;
    }
    return flow;
  }

 private:
  struct Edge {
    int to, next;
    double cap;
  };

  bool bfs(int s, int t) {
    std::fill(level_.begin(), level_.end(), -1);
    queue_.clear();
    queue_.push_back(s);
    level_[s] = 0;
    for (std::size_t qi = 0; qi < queue_.size(); ++qi) {
      int u = queue_[qi];
      for (int e = head_[u]; e != -1; e = edges_[e].next) {
        if (edges_[e].cap > kFlowEps && level_[edges_[e].to] < 0) {
          level_[edges_[e].to] = level_[u] + 1;
          queue_.push_back(edges_[e].to);
        }
      }
    }
    return level_[t] >= 0;
  }

  double dfs(int u, int t, double pushed) {
    if (u == t) return pushed;
    for (int& e = it_[u]; e != -1; e = edges_[e].next) {
      int v = edges_[e].to;
      if (edges_[e].cap > kFlowEps && level_[v] == level_[u] + 1) {
        double f = dfs(v, t, std::min(pushed, edges_[e].cap));
        if (f > kFlowEps) {
          edges_[e].cap -= f;
          edges_[e ^ 1].cap += f;
          return f;
        }
      }
    }
    level_[u] = -1;
    return 0.0;
  }

  std::vector<Edge> edges_;
  std::vector<int> head_, level_, it_;
  std::vector<int> queue_;
  int n_;

 public:
  // Exposes the residual plan of the middle edges after run(); caller knows
  // the edge insertion order.
  double middle_flow(int first_middle_edge, int k) const {
    // middle edges were added starting at index first_middle_edge, one
    // add_edge (= 2 stored edges) each; flow equals the reverse capacity.
    return edges_[first_middle_edge + 2 * k + 1].cap;
  }
};

struct FlowResult {
  double value = 0.0;
  std::vector<double> pair_flow;  // per allowed pair, aligned with pairs vec
};

// Max transportable mass across pairs with d <= eps (+ slack).
FlowResult max_flow_at(std::span<const double> dist, std::size_t n,
                       std::span<const double> mu, std::span<const double> nu,
                       const std::vector<int>& left,
                       const std::vector<int>& right, double eps,
                       bool want_plan) {
  const int a = static_cast<int>(left.size());
  const int b = static_cast<int>(right.size());
  Dinic dinic(a + b + 2);
  const int source = 0, sink = a + b + 1;
  for (int i = 0; i < a; ++i) dinic.add_edge(source, 1 + i, mu[left[i]]);
  for (int j = 0; j < b; ++j) dinic.add_edge(1 + a + j, sink, nu[right[j]]);
  std::vector<std::pair<int, int>> pairs;
  const int first_middle = 2 * (a + b);
  for (int i = 0; i < a; ++i) {
    for (int j = 0; j < b; ++j) {
      if (dist[static_cast<std::size_t>(left[i]) * n + right[j]] <=
          eps + kEdgeSlack) {
        dinic.add_edge(1 + i, 1 + a + j, 2.0);  // cap > total mass = inf
        if (want_plan) pairs.emplace_back(i, j);
      }
    }
  }
  FlowResult res;
  res.value = dinic.run(source, sink);
  if (want_plan) {
    res.pair_flow.resize(pairs.size());
    for (std::size_t k = 0; k < pairs.size(); ++k)
      res.pair_flow[k] = dinic.middle_flow(first_middle, static_cast<int>(k));
  }
  return res;
}

struct ScanResult {
  double eps = 0.0;
  double eps_window = 0.0;  // distance level at which eps is feasible
};

ScanResult prokhorov_scan(std::span<const double> dist, std::size_t n,
                          std::span<const double> mu,
                          std::span<const double> nu) {
  if (mu.size() != n || nu.size() != n || dist.size() != n * n)
    throw DimensionMismatch("prokhorov: mu, nu, dist sizes disagree");
  std::vector<int> left, right;
  for (std::size_t i = 0; i < n; ++i) {
    if (mu[i] > 0.0) left.push_back(static_cast<int>(i));
    if (nu[i] > 0.0) right.push_back(static_cast<int>(i));
  }
  std::vector<double> cand;
  cand.reserve(left.size() * right.size() + 1);
  cand.push_back(0.0);
  for (int i : left)
    for (int j : right) cand.push_back(dist[static_cast<std::size_t>(i) * n + j]);
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

  auto flow_at = [&](std::size_t k) {
    return max_flow_at(dist, n, mu, nu, left, right, cand[k], false).value;
  };
  // p(k) = feasible somewhere in window k; monotone in k.
  auto p = [&](std::size_t k, double& fvalue) {
    fvalue = flow_at(k);
    return 1.0 - fvalue <= cand[k] + kEdgeSlack;
  };
  std::size_t lo = 0, hi = cand.size() - 1;
  double f_lo = 0.0, f_hi = 0.0;
  if (p(lo, f_lo)) {
    hi = lo;
    f_hi = f_lo;
  } else {
    // invariant: p(lo) false, p(hi) true (top window always feasible at
    // eps = 1 >= 1 - flow; flow at max distance is full).
    f_hi = flow_at(hi);
    while (hi - lo > 1) {
      std::size_t mid = lo + (hi - lo) / 2;
      double f_mid;
      if (p(mid, f_mid)) {
        hi = mid;
        f_hi = f_mid;
      } else {
        lo = mid;
        f_lo = f_mid;
      }
    }
  }
  double best = std::max(cand[hi], 1.0 - f_hi);
  double window = cand[hi];
  if (hi > 0) {
    double alt = std::max(cand[hi - 1], 1.0 - f_lo);
    if (alt < best) {
      best = alt;
      window = cand[hi - 1];
    }
  }
  if (best > 1.0) {
    best = 1.0;
    // eps = 1 is always feasible regardless of transport.
  }
  return {best, window};
}

}  // namespace

double prokhorov(std::span<const double> dist, std::size_t n,
                 std::span<const double> mu, std::span<const double> nu) {
  return prokhorov_scan(dist, n, mu, nu).eps;
}

double prokhorov_with_witness(std::span<const double> dist, std::size_t n,
                              std::span<const double> mu,
                              std::span<const double> nu, Coupling& witness) {
  ScanResult sr = prokhorov_scan(dist, n, mu, nu);
  std::vector<int> left, right;
  for (std::size_t i = 0; i < n; ++i) {
    if (mu[i] > 0.0) left.push_back(static_cast<int>(i));
    if (nu[i] > 0.0) right.push_back(static_cast<int>(i));
  }
  FlowResult fr =
      max_flow_at(dist, n, mu, nu, left, right, sr.eps, true);
  witness.rows = n;
  witness.cols = n;
  witness.plan.assign(n * n, 0.0);
  std::vector<double> row_rem(mu.begin(), mu.end());
  std::vector<double> col_rem(nu.begin(), nu.end());
  std::size_t k = 0;
  for (int i : left) {
    for (int j : right) {
      if (dist[static_cast<std::size_t>(i) * n + j] <= sr.eps + kEdgeSlack) {
        double f = fr.pair_flow[k++];
        if (f > 0.0) {
          witness.plan[static_cast<std::size_t>(i) * n + j] += f;
          row_rem[i] -= f;
          col_rem[j] -= f;
        }
      }
    }
  }
  double rem = 1.0 - fr.value;
  if (rem > kFlowEps) {
    // complete to a full coupling; the remainder (mass <= eps) may cross
    // long distances, which is exactly what the drop set absorbs.
    for (std::size_t i = 0; i < n; ++i) {
      if (row_rem[i] <= 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (col_rem[j] <= 0.0) continue;
        witness.plan[i * n + j] += row_rem[i] * col_rem[j] / rem;
      }
    }
  }
  return sr.eps;
}

namespace {

// max transportable mass between sorted atom lists across pairs with
// |a - b| <= eps (closed, consistent with the engine convention); greedy
// leftmost-first allocation is optimal because each b-atom's compatible
// a-atoms form an interval that moves right with b.
double line_throughput(const std::vector<std::pair<double, double>>& a,
                       const std::vector<std::pair<double, double>>& b,
                       double eps) {
  double moved = 0.0;
  std::size_t i = 0;
  double avail = i < a.size() ? a[i].second : 0.0;
  for (const auto& [bv, bm] : b) {
    double need = bm;
    while (need > 0.0 && i < a.size()) {
      if (a[i].first < bv - eps) {
        ++i;
        avail = i < a.size() ? a[i].second : 0.0;
        continue;
      }
      if (a[i].first > bv + eps) break;
      double take = std::min(need, avail);
      moved += take;
      need -= take;
      avail -= take;
      if (avail <= 0.0) {
        ++i;
        avail = i < a.size() ? a[i].second : 0.0;
      }
    }
  }
  return moved;
}

}  // namespace

double prokhorov_line(std::vector<std::pair<double, double>> a,
                      std::vector<std::pair<double, double>> b) {
  double ma = 0.0, mb = 0.0;
  for (auto& [v, m] : a) ma += m;
  for (auto& [v, m] : b) mb += m;
  if (std::abs(ma - 1.0) > 1e-9 || std::abs(mb - 1.0) > 1e-9)
    throw DimensionMismatch("prokhorov_line needs probability masses");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  // exact closed comparisons; the returned hi is certified feasible, so it
  // sits within one bisection step above the true value and lands exactly on
  // critical distances that are representable
  auto feasible = [&](double eps) {
    return line_throughput(a, b, eps) >= 1.0 - eps;
  };
  if (feasible(0.0)) return 0.0;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 80 && hi - lo > 1e-15; ++it) {
    double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  return hi;
}

double ky_fan(const WeightedDeviation& dev) {
  std::vector<std::pair<double, double>> atoms(dev.atoms);
  std::sort(atoms.begin(), atoms.end());
  // window starts: 0 and each distinct deviation value
  std::vector<double> starts{0.0};
  for (auto& [v, m] : atoms)
    if (v > starts.back()) starts.push_back(v);
  double best = std::numeric_limits<double>::infinity();
  for (double w : starts) {
    double tail = 0.0;
    for (auto& [v, m] : atoms)
      if (v > w) tail += m;
    best = std::min(best, std::max(w, tail));
  }
  return best;
}

std::pair<double, double> prok_dominates_kyfan_check(
    std::span<const double> dist, std::size_t n, std::span<const double> mu,
    std::span<const std::size_t> f, std::span<const std::size_t> g) {
  if (f.size() != mu.size() || g.size() != mu.size())
    throw DimensionMismatch("prok_dominates_kyfan_check: map length mismatch");
  std::vector<double> fmu(n, 0.0), gmu(n, 0.0);
  WeightedDeviation dev;
  for (std::size_t x = 0; x < mu.size(); ++x) {
    fmu[f[x]] += mu[x];
    gmu[g[x]] += mu[x];
    dev.atoms.emplace_back(dist[f[x] * n + g[x]], mu[x]);
  }
  return {prokhorov(dist, n, fmu, gmu), ky_fan(dev)};
}

}  // namespace mmg
