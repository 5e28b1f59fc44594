#pragma once

#include <stdexcept>
#include <vector>

#include "mmg/core.hpp"
#include "mmg/mpf.hpp"
#include "mmg/pyramids.hpp"

namespace mmg {

struct MetricViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotNondecreasing : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// F(X) = (X, F o d_X, m_X). Labels and weights preserved; the result is
// re-validated and a triangle failure (wrongly accepted F) surfaces as
// MetricViolation.
FiniteMMSpace transform_space(const FiniteMMSpace& X, const MPFunction& F);

// Transforms every chain element and re-verifies every witness. Requires
// F nondecreasing, otherwise the image need not be a pyramid.
PyramidApprox transform_pyramid(const PyramidApprox& P, const MPFunction& F);

// F_{indices[i]} applied to xs[i].
std::vector<FiniteMMSpace> transform_family(
    const std::vector<FiniteMMSpace>& xs, const MPFamily& fam,
    const std::vector<int>& indices);

}  // namespace mmg
