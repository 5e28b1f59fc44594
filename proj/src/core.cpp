#include "mmg/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "mmg/probmetrics.hpp"

namespace mmg {

double FiniteMMSpace::diameter() const {
  double m = 0.0;
  for (double v : dist) m = std::max(m, v);
  return m;
}

const char* space_error_name(SpaceErrorKind kind) {
  switch (kind) {
    case SpaceErrorKind::kTriangleViolation: return "TriangleViolation";
    case SpaceErrorKind::kAsymmetricMatrix: return "AsymmetricMatrix";
    case SpaceErrorKind::kNegativeDistance: return "NegativeDistance";
    case SpaceErrorKind::kNonzeroDiagonal: return "NonzeroDiagonal";
    case SpaceErrorKind::kBadWeights: return "BadWeights";
    case SpaceErrorKind::kBadShape: return "BadShape";
  }
  return "Unknown";
}

namespace {

SpaceError make_error(SpaceErrorKind kind, std::size_t i, std::size_t j,
                      std::size_t k, std::string msg) {
  return SpaceError{kind, i, j, k, std::move(msg)};
}

}  // namespace

SpaceResult validate_space(std::vector<double> dist,
                           std::vector<double> weights,
                           std::vector<std::string> labels) {
  const std::size_t n = weights.size();
  if (dist.size() != n * n)
    return make_error(SpaceErrorKind::kBadShape, 0, 0, 0,
                      "dist is not an n x n matrix for n = weights size");
  if (!labels.empty() && labels.size() != n)
    return make_error(SpaceErrorKind::kBadShape, 0, 0, 0,
                      "labels length mismatch");
  if (labels.empty()) {
    labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = "p" + std::to_string(i);
  }

  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (weights[i] < 0.0)
      return make_error(SpaceErrorKind::kBadWeights, i, 0, 0,
                        "negative weight");
    sum += weights[i];
  }
  if (std::abs(sum - 1.0) > kMassTol)
    return make_error(SpaceErrorKind::kBadWeights, 0, 0, 0,
                      "weights do not sum to 1");

  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(dist[i * n + i]) > kMetricTol)
      return make_error(SpaceErrorKind::kNonzeroDiagonal, i, i, 0,
                        "nonzero diagonal entry");
    for (std::size_t j = 0; j < n; ++j) {
      if (dist[i * n + j] < 0.0)
        return make_error(SpaceErrorKind::kNegativeDistance, i, j, 0,
                          "negative distance");
      if (std::abs(dist[i * n + j] - dist[j * n + i]) > kMetricTol)
        return make_error(SpaceErrorKind::kAsymmetricMatrix, i, j, 0,
                          "matrix not symmetric");
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        if (dist[i * n + j] > dist[i * n + k] + dist[k * n + j] + kMetricTol)
          return make_error(SpaceErrorKind::kTriangleViolation, i, j, k,
                            "triangle inequality violated");

  // support normalization: drop zero-weight points
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < n; ++i)
    if (weights[i] > 0.0) keep.push_back(i);
  if (keep.empty())
    return make_error(SpaceErrorKind::kBadWeights, 0, 0, 0, "empty support");

  FiniteMMSpace X;
  if (keep.size() == n) {
    X.labels = std::move(labels);
    X.dist = std::move(dist);
    X.weights = std::move(weights);
    return X;
  }
  const std::size_t m = keep.size();
  X.labels.reserve(m);
  X.weights.reserve(m);
  X.dist.resize(m * m);
  double kept_mass = 0.0;
  for (std::size_t a : keep) kept_mass += weights[a];
  for (std::size_t a = 0; a < m; ++a) {
    X.labels.push_back(labels[keep[a]]);
    X.weights.push_back(weights[keep[a]] / kept_mass);
    for (std::size_t b = 0; b < m; ++b)
      X.dist[a * m + b] = dist[keep[a] * n + keep[b]];
  }
  return X;
}

FiniteMMSpace validate_space_or_throw(std::vector<double> dist,
                                      std::vector<double> weights,
                                      std::vector<std::string> labels) {
  SpaceResult r =
      validate_space(std::move(dist), std::move(weights), std::move(labels));
  if (auto* err = std::get_if<SpaceError>(&r)) {
    throw std::invalid_argument(std::string(space_error_name(err->kind)) +
                                ": " + err->message);
  }
  return std::get<FiniteMMSpace>(std::move(r));
}

std::vector<double> pushforward_weights(const FiniteMMSpace& X,
                                        std::span<const std::size_t> map,
                                        std::size_t m) {
  std::vector<double> w(m, 0.0);
  for (std::size_t i = 0; i < X.size(); ++i) w[map[i]] += X.weights[i];
  return w;
}

bool verify_lipschitz_cert(const FiniteMMSpace& X, const FiniteMMSpace& Y,
                           std::span<const std::size_t> map) {
  if (map.size() != X.size()) return false;
  for (std::size_t v : map)
    if (v >= Y.size()) return false;
  const std::size_t n = X.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (Y.d(map[i], map[j]) > X.d(i, j) + kMetricTol) return false;
  std::vector<double> push = pushforward_weights(X, map, Y.size());
  for (std::size_t j = 0; j < Y.size(); ++j)
    if (std::abs(push[j] - Y.weights[j]) > kMetricTol) return false;
  return true;
}

DominationResult dominates_bruteforce(const FiniteMMSpace& X,
                                      const FiniteMMSpace& Y,
                                      double budget) {
  const std::size_t n = X.size(), m = Y.size();
  double total = std::pow(static_cast<double>(m), static_cast<double>(n));
  if (total > budget) return BudgetExceeded{total, budget};
  std::vector<std::size_t> map(n, 0);
  while (true) {
    if (verify_lipschitz_cert(X, Y, map)) return map;
    // odometer increment
    std::size_t pos = 0;
    while (pos < n && ++map[pos] == m) map[pos++] = 0;
    if (pos == n) break;
  }
  return std::monostate{};
}

bool verify_mm_iso_cert(const FiniteMMSpace& X, const FiniteMMSpace& Y,
                        const EpsMMIsoCert& cert) {
  if (cert.map.size() != X.size() || cert.eps < 0.0) return false;
  for (std::size_t v : cert.map)
    if (v >= Y.size()) return false;
  for (std::size_t i : cert.domain)
    if (i >= X.size()) return false;
  double dom_mass = 0.0;
  for (std::size_t i : cert.domain) dom_mass += X.weights[i];
  if (dom_mass < 1.0 - cert.eps - kMetricTol) return false;
  for (std::size_t a = 0; a < cert.domain.size(); ++a) {
    for (std::size_t b = a + 1; b < cert.domain.size(); ++b) {
      std::size_t i = cert.domain[a], j = cert.domain[b];
      double distortion =
          std::abs(X.d(i, j) - Y.d(cert.map[i], cert.map[j]));
      if (distortion > cert.eps + kMetricTol) return false;
    }
  }
  std::vector<double> push = pushforward_weights(X, cert.map, Y.size());
  double prok = prokhorov(Y.dist, Y.size(), push, Y.weights);
  return prok <= cert.eps + kMetricTol;
}

double DistanceDistribution::total_mass() const {
  double s = 0.0;
  for (auto& [v, m] : atoms) s += m;
  return s;
}

DistanceDistribution distance_distribution(const FiniteMMSpace& X) {
  const std::size_t n = X.size();
  std::vector<std::pair<double, double>> raw;
  raw.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      raw.emplace_back(X.d(i, j), X.weights[i] * X.weights[j]);
  std::sort(raw.begin(), raw.end());
  DistanceDistribution dd;
  for (auto& [v, m] : raw) {
    if (!dd.atoms.empty() && dd.atoms.back().first == v)
      dd.atoms.back().second += m;
    else
      dd.atoms.emplace_back(v, m);
  }
  return dd;
}

std::optional<SpaceError> spot_check_space(const FiniteMMSpace& X, int trials,
                                           std::uint64_t seed) {
  std::size_t n = X.size();
  if (n == 0)
    return SpaceError{SpaceErrorKind::kBadShape, 0, 0, 0, "empty space"};
  double wsum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (X.weights[i] <= 0.0)
      return SpaceError{SpaceErrorKind::kBadWeights, i, 0, 0,
                        "nonpositive weight"};
    wsum += X.weights[i];
    if (std::abs(X.d(i, i)) > 1e-9)
      return SpaceError{SpaceErrorKind::kNonzeroDiagonal, i, i, 0,
                        "nonzero diagonal"};
  }
  if (std::abs(wsum - 1.0) > 1e-9)
    return SpaceError{SpaceErrorKind::kBadWeights, 0, 0, 0,
                      "weights do not sum to 1"};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (X.d(i, j) < 0.0)
        return SpaceError{SpaceErrorKind::kNegativeDistance, i, j, 0,
                          "negative distance"};
      if (std::abs(X.d(i, j) - X.d(j, i)) > 1e-9)
        return SpaceError{SpaceErrorKind::kAsymmetricMatrix, i, j, 0,
                          "asymmetric matrix"};
    }
  std::uint64_t state = seed ^ 0x9E3779B97F4A7C15ull;
  auto next = [&state]() {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    return state;
  };
  for (int t = 0; t < trials; ++t) {
    std::size_t i = next() % n, j = next() % n, k = next() % n;
    if (X.d(i, j) > X.d(i, k) + X.d(k, j) + 1e-9)
      return SpaceError{SpaceErrorKind::kTriangleViolation, i, j, k,
                        "triangle inequality violated"};
  }
  return std::nullopt;
}

std::string space_to_json(const FiniteMMSpace& X) {
  nlohmann::json j;
  j["labels"] = X.labels;
  j["dist"] = X.dist;
  j["weights"] = X.weights;
  return j.dump(2);
}

FiniteMMSpace space_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  std::vector<std::string> labels;
  if (j.contains("labels")) labels = j["labels"].get<std::vector<std::string>>();
  return validate_space_or_throw(j["dist"].get<std::vector<double>>(),
                                 j["weights"].get<std::vector<double>>(),
                                 std::move(labels));
}

FiniteMMSpace space_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  if (rows.size() < 2) throw std::invalid_argument("csv: too few rows");
  const std::size_t n = rows.size() - 1;
  std::vector<std::string> labels;
  std::vector<double> dist(n * n), weights(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = rows[i + 1];
    if (r.size() != n + 2)
      throw std::invalid_argument("csv: wrong column count");
    labels.push_back(r[0]);
    for (std::size_t j = 0; j < n; ++j) dist[i * n + j] = std::stod(r[j + 1]);
    weights[i] = std::stod(r[n + 1]);
  }
  return validate_space_or_throw(std::move(dist), std::move(weights),
                                 std::move(labels));
}

}  // namespace mmg
