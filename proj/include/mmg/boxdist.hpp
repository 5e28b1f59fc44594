#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmg/core.hpp"

namespace mmg {

// Common partition of [0,1) into half-open intervals, each assigned to one
// point of X and one point of Y.
struct ParameterAlignment {
  std::vector<double> lengths;
  std::vector<std::size_t> to_x;
  std::vector<std::size_t> to_y;
};

struct BoxBracket {
  double lower = 0.0;
  double upper = 1.0;
  std::string method;        // route that produced the upper bound
  std::string lower_method;  // always heuristic-free dd bound
  std::uint64_t seed = 0;
  bool has_cert = false;
  EpsMMIsoCert cert;  // valid when has_cert
};

struct InvalidAlignment : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CertRejected : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// eps = max(1 - kept mass, max distortion over kept interval pairs).
// Sound upper bound on the box distance by definition.
double box_upper_from_alignment(const FiniteMMSpace& X, const FiniteMMSpace& Y,
                                const ParameterAlignment& align,
                                const std::vector<bool>& drop);

// 3 * cert.eps after re-verification; throws CertRejected.
double box_upper_from_cert(const FiniteMMSpace& X, const FiniteMMSpace& Y,
                           const EpsMMIsoCert& cert);

// prokhorov(distance_distribution(X), distance_distribution(Y)) / 2.
// Sound: parameters realizing box eps agree within eps off L2-mass 2 eps.
double box_lower_dd(const FiniteMMSpace& X, const FiniteMMSpace& Y);

// Exhaustive search over interval bijections and dropped subsets for
// uniform spaces whose sizes divide the refinement (refinement <= 8).
// Refinement-limited ground truth, exact over that search class.
double box_oracle_tiny(const FiniteMMSpace& X, const FiniteMMSpace& Y,
                       int refinement);

BoxBracket box_estimate(const FiniteMMSpace& X, const FiniteMMSpace& Y,
                        long budget = 200000, std::uint64_t seed = 1);

std::string bracket_to_json(const BoxBracket& b);
BoxBracket bracket_from_json(const std::string& text);

}  // namespace mmg
