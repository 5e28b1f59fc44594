#include "mmg/transform.hpp"

#include <sstream>

namespace mmg {

FiniteMMSpace transform_space(const FiniteMMSpace& X, const MPFunction& F) {
  std::size_t n = X.size();
  std::vector<double> nd(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double v = F(X.d(i, j));
      nd[i * n + j] = v;
      nd[j * n + i] = v;
    }
  SpaceResult r = validate_space(std::move(nd), X.weights, X.labels);
  if (auto* err = std::get_if<SpaceError>(&r)) {
    std::ostringstream msg;
    msg << "transform by " << F.name()
        << " broke the metric axioms: " << space_error_name(err->kind) << " "
        << err->message;
    throw MetricViolation(msg.str());
  }
  FiniteMMSpace out = std::get<FiniteMMSpace>(std::move(r));
  out.weights = X.weights;  // bit-exact, validation may renormalize
  return out;
}

PyramidApprox transform_pyramid(const PyramidApprox& P, const MPFunction& F) {
  if (!F.is_nondecreasing())
    throw NotNondecreasing("transform_pyramid: " + F.name() +
                           " is not nondecreasing; the transformed family "
                           "need not be a pyramid");
  PyramidApprox out;
  out.chain.reserve(P.chain.size());
  for (const auto& X : P.chain) out.chain.push_back(transform_space(X, F));
  out.witnesses = P.witnesses;
  // re-verify rather than assume: a nondecreasing F keeps 1-Lipschitz maps
  // 1-Lipschitz, and weights are untouched, but the check is cheap
  verify_pyramid(out);
  return out;
}

std::vector<FiniteMMSpace> transform_family(
    const std::vector<FiniteMMSpace>& xs, const MPFamily& fam,
    const std::vector<int>& indices) {
  if (xs.size() != indices.size())
    throw std::invalid_argument("transform_family: index misalignment");
  std::vector<FiniteMMSpace> out;
  out.reserve(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k)
    out.push_back(transform_space(xs[k], fam.generator(indices[k])));
  return out;
}

}  // namespace mmg
