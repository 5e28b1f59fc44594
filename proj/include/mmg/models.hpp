#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mmg/core.hpp"

namespace mmg {

enum class ModelKind {
  kSphere,
  kProjective,
  kGaussian,
  kGaussianQuotient,
  kTwoPoint,
};

enum class MetricFlavor { kGeodesic, kEuclidean };

struct ModelSpec {
  ModelKind kind = ModelKind::kSphere;
  int n = 1;             // model dimension (sphere S^n, FP^n, Gamma^n)
  double r = 1.0;        // sphere / projective radius
  double lambda = 1.0;   // Gaussian standard deviation
  int field_dim = 2;     // 1 = R, 2 = C, 4 = H (quotient kinds only)
  MetricFlavor flavor = MetricFlavor::kGeodesic;
  int k = 100;           // sample count
  std::uint64_t seed = 1;
  double s = 1.0;        // two-point separation
};

ModelSpec model_spec_from_json(const std::string& text);
std::string model_spec_to_json(const ModelSpec& spec);

// k points of R^dim stored row-major.
struct PointCloud {
  int dim = 0;
  std::vector<double> coords;

  std::size_t count() const {
    return dim == 0 ? 0 : coords.size() / static_cast<std::size_t>(dim);
  }
  std::span<const double> row(std::size_t i) const {
    return {coords.data() + i * static_cast<std::size_t>(dim),
            static_cast<std::size_t>(dim)};
  }
};

// Per-point Philox streams keyed by (seed, tag, point index): point i of a
// dim-d cloud reads the same stream prefix as point i of any higher
// dimensional cloud with the same seed and tag (common random numbers).
PointCloud gaussian_cloud(int dim, double lambda, int k, std::uint64_t seed,
                          std::uint64_t tag = 0);
// Normalized Gaussian vectors scaled to radius r (uniform on the sphere).
PointCloud sphere_cloud(int ambient_dim, double r, int k, std::uint64_t seed,
                        std::uint64_t tag = 0);
PointCloud project_cloud(const PointCloud& cloud, int m);

// Uniform empirical space from a cloud. Geodesic flavor needs the sphere
// radius r; Euclidean ignores it.
FiniteMMSpace space_from_cloud(const PointCloud& cloud, MetricFlavor flavor,
                               double r = 0.0);

// Hopf quotient distance between z and w as vectors of scalars over the
// field of real dimension field_dim, via the closed form
// inf_t ||z - w t||^2 = ||z||^2 + ||w||^2 - 2 |<z, w>| with the field
// Hermitian inner product. Geodesic flavor is r arccos(|<z,w>| / r^2).
double quotient_distance(std::span<const double> z, std::span<const double> w,
                         int field_dim, MetricFlavor flavor, double r = 0.0);

// Independent cross-check: minimizes over a dense sample of the unit
// scalar group (with multiscale local refinement) instead of the closed
// form. coarse = initial global grid size.
double quotient_dist_grid_oracle(std::span<const double> z,
                                 std::span<const double> w, int field_dim,
                                 MetricFlavor flavor, double r = 0.0,
                                 int coarse = 4096);

FiniteMMSpace quotient_space_from_cloud(const PointCloud& cloud, int field_dim,
                                        MetricFlavor flavor, double r = 0.0);

FiniteMMSpace sample_sphere(const ModelSpec& spec);
FiniteMMSpace sample_projective(const ModelSpec& spec);
FiniteMMSpace sample_gaussian(const ModelSpec& spec);
FiniteMMSpace sample_model(const ModelSpec& spec);

// ({0, s}, |.|, (delta_0 + delta_s) / 2); s = 0 collapses to one point.
FiniteMMSpace two_point(double s);

// Kolmogorov-Smirnov statistic of `values` against N(0, sd^2).
double ks_statistic_normal(std::vector<double> values, double sd);

}  // namespace mmg
