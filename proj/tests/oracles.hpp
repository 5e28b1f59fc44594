#pragma once

// Independent reference implementations and instance generators shared by
// the unit tests and the acceptance binary. Everything here is written for
// clarity over speed and must not reuse engine internals.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "mmg/core.hpp"
#include "mmg/rng.hpp"

namespace oracles {

// Prokhorov by definition: scan every subset A at every candidate epsilon,
// demanding mu(A^eps) >= nu(A) - eps in both directions.
inline double prok_subset_oracle(const std::vector<double>& dist,
                                 std::size_t n, const std::vector<double>& mu,
                                 const std::vector<double>& nu) {
  std::vector<double> windows{0.0};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) windows.push_back(dist[i * n + j]);
  std::sort(windows.begin(), windows.end());

  const std::size_t nmask = std::size_t{1} << n;
  auto enlarged_mass = [&](const std::vector<double>& m, std::size_t mask,
                           double eps) {
    double out = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      bool in = false;
      for (std::size_t j = 0; j < n && !in; ++j)
        if ((mask >> j) & 1) in = dist[i * n + j] <= eps + 1e-12;
      if (in) out += m[i];
    }
    return out;
  };
  auto mass = [&](const std::vector<double>& m, std::size_t mask) {
    double out = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if ((mask >> i) & 1) out += m[i];
    return out;
  };

  std::vector<double> cands = windows;
  for (std::size_t mask = 1; mask < nmask; ++mask)
    for (double w : windows) {
      cands.push_back(mass(nu, mask) - enlarged_mass(mu, mask, w));
      cands.push_back(mass(mu, mask) - enlarged_mass(nu, mask, w));
    }
  for (double& c : cands) c = std::max(0.0, c);
  std::sort(cands.begin(), cands.end());
  cands.erase(std::unique(cands.begin(), cands.end()), cands.end());

  auto feasible = [&](double eps) {
    for (std::size_t mask = 1; mask < nmask; ++mask) {
      if (mass(nu, mask) > enlarged_mass(mu, mask, eps) + eps + 1e-12)
        return false;
      if (mass(mu, mask) > enlarged_mass(nu, mask, eps) + eps + 1e-12)
        return false;
    }
    return true;
  };
  for (double c : cands)
    if (feasible(c)) return c;
  return 1.0;
}

// Ky Fan by definition over the candidate set {0} u {deviation values}
// u {tail masses}.
inline double ky_fan_oracle(
    const std::vector<std::pair<double, double>>& atoms) {
  std::vector<double> cands{0.0};
  for (auto& [v, m] : atoms) cands.push_back(v);
  std::vector<double> starts = cands;
  for (double s : starts) {
    double tail = 0.0;
    for (auto& [w, q] : atoms)
      if (w > s) tail += q;
    cands.push_back(tail);
  }
  double best = 2.0;
  for (double eps : cands) {
    if (eps < 0.0) continue;
    double tail = 0.0;
    for (auto& [v, m] : atoms)
      if (v > eps) tail += m;
    if (tail <= eps && eps < best) best = eps;
  }
  return best;
}

// Euclidean metric space on k random points of [0, scale]^dim; triangle
// inequality holds by construction.
inline mmg::FiniteMMSpace random_euclidean_space(std::size_t k, int dim,
                                                 double scale,
                                                 std::uint64_t seed,
                                                 bool uniform_weights) {
  mmg::Philox rng(seed);
  std::vector<double> pts(k * dim);
  for (double& p : pts) p = scale * rng.next_double();
  std::vector<double> dist(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      double s = 0.0;
      for (int c = 0; c < dim; ++c) {
        double d = pts[i * dim + c] - pts[j * dim + c];
        s += d * d;
      }
      dist[i * k + j] = std::sqrt(s);
    }
  std::vector<double> w(k, 1.0 / k);
  if (!uniform_weights) {
    double tot = 0.0;
    for (double& x : w) tot += (x = 0.05 + rng.next_double());
    for (double& x : w) x /= tot;
  }
  return mmg::validate_space_or_throw(std::move(dist), std::move(w));
}

inline std::vector<double> random_simplex(std::size_t k, std::uint64_t seed) {
  mmg::Philox rng(seed);
  std::vector<double> w(k);
  double tot = 0.0;
  for (double& x : w) tot += (x = 0.05 + rng.next_double());
  for (double& x : w) x /= tot;
  return w;
}

}  // namespace oracles
