#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace mmg {

inline constexpr double kMetricTol = 1e-9;
inline constexpr double kMassTol = 1e-12;

struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Joint mass over point pairs of two finite spaces; Strassen-style witness
// for a Prokhorov bound. plan is |mu| x |nu| row-major.
struct Coupling {
  std::size_t rows = 0, cols = 0;
  std::vector<double> plan;
  double at(std::size_t i, std::size_t j) const { return plan[i * cols + j]; }
};

// Pairs (deviation value, probability mass) of two maps on a common
// probability space.
struct WeightedDeviation {
  std::vector<std::pair<double, double>> atoms;
};

// Exact Prokhorov distance between mu and nu on a shared finite metric
// space given by the n x n matrix `dist` (row-major). The optimal epsilon
// lies in the finite set {0} u {pairwise distances} u {mass deficits}; each
// candidate window is checked by a bipartite max-flow feasibility test
// (mass >= 1 - eps transportable across pairs with d <= eps).
//
// Ball convention: U_eps in the definition is open, so the infimum is not
// sensitive to the boundary; we evaluate feasibility with the closed
// comparison d <= eps + 1e-12 at each candidate, which yields the same
// infimum and keeps the engine and the subset oracle consistent.
double prokhorov(std::span<const double> dist, std::size_t n,
                 std::span<const double> mu, std::span<const double> nu);

// Same, also returning a full coupling whose mass on pairs with
// d > eps* is at most eps*.
double prokhorov_with_witness(std::span<const double> dist, std::size_t n,
                              std::span<const double> mu,
                              std::span<const double> nu, Coupling& witness);

// Prokhorov distance between two atomic measures on the line, given as
// (value, mass) lists. Feasibility at eps uses a leftmost-first greedy
// sweep (optimal on interval bipartite graphs); the eps is then located
// by bisection to 1e-12. Equal total masses required (1 within 1e-9).
double prokhorov_line(std::vector<std::pair<double, double>> a,
                      std::vector<std::pair<double, double>> b);

// Minimal eps >= 0 with mass{dev > eps} <= eps, by a sorted scan.
double ky_fan(const WeightedDeviation& dev);

// prok <= kf: given maps f, g from a common finite probability
// space (weights mu) into a metric space (dist, n points), returns
// (prokhorov of the pushforwards, ky_fan of the pointwise deviations).
std::pair<double, double> prok_dominates_kyfan_check(
    std::span<const double> dist, std::size_t n, std::span<const double> mu,
    std::span<const std::size_t> f, std::span<const std::size_t> g);

}  // namespace mmg
