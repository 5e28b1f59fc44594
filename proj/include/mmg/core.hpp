#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace mmg {

// A finite metric measure space: n labelled points, a validated distance
// matrix and a probability weight vector. Immutable after construction;
// all operations on it are pure.
struct FiniteMMSpace {
  std::vector<std::string> labels;
  std::vector<double> dist;  // n x n, row-major
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
  double d(std::size_t i, std::size_t j) const {
    return dist[i * size() + j];
  }
  double diameter() const;
};

enum class SpaceErrorKind {
  kTriangleViolation,
  kAsymmetricMatrix,
  kNegativeDistance,
  kNonzeroDiagonal,
  kBadWeights,
  kBadShape,
};

struct SpaceError {
  SpaceErrorKind kind;
  std::size_t i = 0, j = 0, k = 0;
  std::string message;
};

using SpaceResult = std::variant<FiniteMMSpace, SpaceError>;

// Validates metric axioms (tolerance 1e-9) and the weight vector
// (sum 1 within 1e-12), drops zero-weight points and renormalizes
// (support convention: the space is the support of its measure).
SpaceResult validate_space(std::vector<double> dist,
                           std::vector<double> weights,
                           std::vector<std::string> labels = {});

// Throwing convenience wrapper.
FiniteMMSpace validate_space_or_throw(std::vector<double> dist,
                                      std::vector<double> weights,
                                      std::vector<std::string> labels = {});

const char* space_error_name(SpaceErrorKind kind);

// True iff `map` is a 1-Lipschitz map X -> Y pushing m_X to m_Y
// (both within 1e-9).
bool verify_lipschitz_cert(const FiniteMMSpace& X, const FiniteMMSpace& Y,
                           std::span<const std::size_t> map);

struct BudgetExceeded {
  double required;
  double budget;
};

using DominationResult =
    std::variant<std::vector<std::size_t>, std::monostate, BudgetExceeded>;

// Exhaustive search for a Lipschitz-order witness X -> Y. Returns a witness
// map, "none exists", or BudgetExceeded when |Y|^|X| > budget.
DominationResult dominates_bruteforce(const FiniteMMSpace& X,
                                      const FiniteMMSpace& Y,
                                      double budget = 1e7);

// Certificate that a point map is an eps-mm-isomorphism: distortion <= eps
// on the nonexceptional domain, domain mass >= 1 - eps, pushforward within
// Prokhorov eps of m_Y.
struct EpsMMIsoCert {
  std::vector<std::size_t> map;     // X -> Y
  std::vector<std::size_t> domain;  // nonexceptional indices of X
  double eps = 0.0;
};

bool verify_mm_iso_cert(const FiniteMMSpace& X, const FiniteMMSpace& Y,
                        const EpsMMIsoCert& cert);

// Pushforward of m_X x m_X under d_X: sorted (distance, mass) atoms.
struct DistanceDistribution {
  std::vector<std::pair<double, double>> atoms;
  double total_mass() const;
};

DistanceDistribution distance_distribution(const FiniteMMSpace& X);

// Pushforward weights of X under an index map into a space of `m` points.
std::vector<double> pushforward_weights(const FiniteMMSpace& X,
                                        std::span<const std::size_t> map,
                                        std::size_t m);

// Randomized metric-axiom spot check for large spaces where the full
// O(n^3) triangle scan is too expensive; diagonal, weights and symmetry
// are still checked in full.
std::optional<SpaceError> spot_check_space(const FiniteMMSpace& X, int trials,
                                           std::uint64_t seed);

// JSON object {labels, dist (row-major), weights}.
std::string space_to_json(const FiniteMMSpace& X);
FiniteMMSpace space_from_json(const std::string& text);

// CSV matrix: first row and first column carry labels, last column weights.
FiniteMMSpace space_from_csv(const std::string& text);

}  // namespace mmg
