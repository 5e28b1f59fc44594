#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mmg/boxdist.hpp"
#include "mmg/core.hpp"
#include "mmg/mpf.hpp"

namespace mmg {

// Finite approximation of a pyramid: a Lipschitz-order monotone chain
// Y_1 < Y_2 < ... with a verified 1-Lipschitz measure-preserving witness
// map Y_{m+1} -> Y_m for each consecutive pair.
struct PyramidApprox {
  std::vector<FiniteMMSpace> chain;
  std::vector<std::vector<std::size_t>> witnesses;  // chain[m+1] -> chain[m]

  std::size_t size() const { return chain.size(); }
};

struct InvalidPyramid : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Throws InvalidPyramid when a witness fails verify_lipschitz_cert.
void verify_pyramid(const PyramidApprox& P);

PyramidApprox pyramid_from_chain(std::vector<FiniteMMSpace> chain,
                                 std::vector<std::vector<std::size_t>> wit);

// Bracket on the box distance from Y to the pyramid approximated by P.
// Upper: best over chain elements and searched dominated candidates,
// including the 4 eps route through almost 1-Lipschitz maps. Lower: min
// over chain elements of box_lower_dd, chain-restricted and therefore
// heuristic over the full pyramid (method tag records this).
BoxBracket dist_to_pyramid(const FiniteMMSpace& Y, const PyramidApprox& P,
                           long budget = 200000, std::uint64_t seed = 1);

struct WeakConvergenceDiagnostic {
  struct Probe {
    std::string label;
    std::vector<BoxBracket> trajectory;  // one bracket per index
    std::string verdict;  // "to_zero", "bounded_away", "inconclusive"
    double inf_lower = 0.0;
  };
  std::vector<int> indices;
  std::vector<Probe> probes;
};

WeakConvergenceDiagnostic weak_convergence_probe(
    const std::vector<PyramidApprox>& seq, const std::vector<int>& indices,
    const std::vector<FiniteMMSpace>& probes, long budget = 200000,
    std::uint64_t seed = 1, double tol = 1e-3);

// Chain of empirical Gaussian spaces Gamma^k with coordinate-projection
// witnesses on a shared sample; quotient variant divides by the unit
// scalar group of the field (field_dim 1, 2 or 4).
PyramidApprox build_gaussian_pyramid_approx(double lambda,
                                            const std::vector<int>& dims,
                                            int samples, std::uint64_t seed,
                                            int field_dim = 0);

std::string pyramid_to_json(const PyramidApprox& P);
PyramidApprox pyramid_from_json(const std::string& text);

}  // namespace mmg
