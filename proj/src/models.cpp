#include "mmg/models.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "mmg/rng.hpp"

namespace mmg {

namespace {

// one shared base tag: a sphere cloud and a gaussian cloud with equal
// (seed, tag) read the same per-point streams, so the sphere points are
// exactly the normalized versions of the gaussian draws (CRN coupling)
constexpr std::uint64_t kCloudTag = 0x636c6f7564;

double clamp(double v, double lo, double hi) {
  return std::min(std::max(v, lo), hi);
}

std::vector<std::string> point_labels(int k) {
  std::vector<std::string> labels(k);
  for (int i = 0; i < k; ++i) labels[i] = "p" + std::to_string(i);
  return labels;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double sqnorm(std::span<const double> a) { return dot(a, a); }

// |sum_i conj(z_i) w_i| over the field of real dimension d.
double hermitian_modulus(std::span<const double> z, std::span<const double> w,
                         int d) {
  if (d == 1) return std::abs(dot(z, w));
  std::size_t n = z.size() / d;
  if (d == 2) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double zx = z[2 * i], zy = z[2 * i + 1];
      double wx = w[2 * i], wy = w[2 * i + 1];
      re += zx * wx + zy * wy;
      im += zx * wy - zy * wx;
    }
    return std::hypot(re, im);
  }
  // quaternions: conj(z) w summed componentwise
  double qa = 0.0, qb = 0.0, qc = 0.0, qd = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double a = z[4 * i], b = -z[4 * i + 1], c = -z[4 * i + 2],
           e = -z[4 * i + 3];
    double f = w[4 * i], g = w[4 * i + 1], h = w[4 * i + 2], k = w[4 * i + 3];
    qa += a * f - b * g - c * h - e * k;
    qb += a * g + b * f + c * k - e * h;
    qc += a * h - b * k + c * f + e * g;
    qd += a * k + b * h - c * g + e * f;
  }
  return std::sqrt(qa * qa + qb * qb + qc * qc + qd * qd);
}

}  // namespace

PointCloud gaussian_cloud(int dim, double lambda, int k, std::uint64_t seed,
                          std::uint64_t tag) {
  PointCloud cloud;
  cloud.dim = dim;
  cloud.coords.resize(static_cast<std::size_t>(dim) * k);
  for (int i = 0; i < k; ++i) {
    Philox rng(seed, substream(kCloudTag + tag, i));
    for (int j = 0; j < dim; ++j)
      cloud.coords[static_cast<std::size_t>(i) * dim + j] =
          lambda * rng.next_normal();
  }
  return cloud;
}

PointCloud sphere_cloud(int ambient_dim, double r, int k, std::uint64_t seed,
                        std::uint64_t tag) {
  PointCloud cloud;
  cloud.dim = ambient_dim;
  cloud.coords.resize(static_cast<std::size_t>(ambient_dim) * k);
  for (int i = 0; i < k; ++i) {
    Philox rng(seed, substream(kCloudTag + tag, i));
    double* row = cloud.coords.data() + static_cast<std::size_t>(i) * ambient_dim;
    double norm2 = 0.0;
    for (int j = 0; j < ambient_dim; ++j) {
      row[j] = rng.next_normal();
      norm2 += row[j] * row[j];
    }
    while (norm2 == 0.0) {  // essentially impossible, but total
      norm2 = 0.0;
      for (int j = 0; j < ambient_dim; ++j) {
        row[j] = rng.next_normal();
        norm2 += row[j] * row[j];
      }
    }
    double scale = r / std::sqrt(norm2);
    for (int j = 0; j < ambient_dim; ++j) row[j] *= scale;
  }
  return cloud;
}

PointCloud project_cloud(const PointCloud& cloud, int m) {
  if (m > cloud.dim)
    throw std::invalid_argument("project_cloud: m exceeds cloud dimension");
  PointCloud out;
  out.dim = m;
  std::size_t k = cloud.count();
  out.coords.resize(static_cast<std::size_t>(m) * k);
  for (std::size_t i = 0; i < k; ++i)
    for (int j = 0; j < m; ++j)
      out.coords[i * m + j] = cloud.coords[i * cloud.dim + j];
  return out;
}

FiniteMMSpace space_from_cloud(const PointCloud& cloud, MetricFlavor flavor,
                               double r) {
  std::size_t k = cloud.count();
  FiniteMMSpace X;
  X.labels = point_labels(static_cast<int>(k));
  X.weights.assign(k, 1.0 / k);
  X.dist.assign(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      double d;
      if (flavor == MetricFlavor::kGeodesic) {
        double u = clamp(dot(cloud.row(i), cloud.row(j)) / (r * r), -1.0, 1.0);
        d = r * std::acos(u);
      } else {
        double s = 0.0;
        auto a = cloud.row(i), b = cloud.row(j);
        for (std::size_t t = 0; t < a.size(); ++t) {
          double g = a[t] - b[t];
          s += g * g;
        }
        d = std::sqrt(s);
      }
      X.dist[i * k + j] = d;
      X.dist[j * k + i] = d;
    }
  return X;
}

double quotient_distance(std::span<const double> z, std::span<const double> w,
                         int field_dim, MetricFlavor flavor, double r) {
  double q = hermitian_modulus(z, w, field_dim);
  if (flavor == MetricFlavor::kGeodesic) {
    double u = clamp(q / (r * r), -1.0, 1.0);
    return r * std::acos(u);
  }
  double sq = sqnorm(z) + sqnorm(w) - 2.0 * q;
  return std::sqrt(std::max(0.0, sq));
}

namespace {

// squared distance ||z - w t|| for a unit scalar t of the field
double shifted_sqdist(std::span<const double> z, std::span<const double> w,
                      int d, const double* t) {
  std::size_t n = z.size() / d;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (d == 1) {
      double g = z[i] - w[i] * t[0];
      s += g * g;
    } else if (d == 2) {
      double wx = w[2 * i] * t[0] - w[2 * i + 1] * t[1];
      double wy = w[2 * i] * t[1] + w[2 * i + 1] * t[0];
      double gx = z[2 * i] - wx, gy = z[2 * i + 1] - wy;
      s += gx * gx + gy * gy;
    } else {
      double a = w[4 * i], b = w[4 * i + 1], c = w[4 * i + 2],
             e = w[4 * i + 3];
      // (a,b,c,e) * t, quaternion product
      double pa = a * t[0] - b * t[1] - c * t[2] - e * t[3];
      double pb = a * t[1] + b * t[0] + c * t[3] - e * t[2];
      double pc = a * t[2] - b * t[3] + c * t[0] + e * t[1];
      double pd = a * t[3] + b * t[2] - c * t[1] + e * t[0];
      double g0 = z[4 * i] - pa, g1 = z[4 * i + 1] - pb;
      double g2 = z[4 * i + 2] - pc, g3 = z[4 * i + 3] - pd;
      s += g0 * g0 + g1 * g1 + g2 * g2 + g3 * g3;
    }
  }
  return s;
}

}  // namespace

double quotient_dist_grid_oracle(std::span<const double> z,
                                 std::span<const double> w, int field_dim,
                                 MetricFlavor flavor, double r, int coarse) {
  double best_sq = 1e300;
  double best_t[4] = {1.0, 0.0, 0.0, 0.0};
  if (field_dim == 1) {
    for (double t : {1.0, -1.0}) {
      double s = shifted_sqdist(z, w, 1, &t);
      if (s < best_sq) {
        best_sq = s;
        best_t[0] = t;
      }
    }
  } else if (field_dim == 2) {
    const double two_pi = 6.283185307179586476925286766559;
    double center = 0.0, span = two_pi;
    int pts = coarse;
    for (int round = 0; round < 5; ++round) {
      double step = span / pts;
      double start = center - span / 2.0;
      double best_th = center;
      for (int k = 0; k < pts; ++k) {
        double th = start + k * step;
        double t[2] = {std::cos(th), std::sin(th)};
        double s = shifted_sqdist(z, w, 2, t);
        if (s < best_sq) {
          best_sq = s;
          best_th = th;
        }
      }
      center = best_th;
      span = 4.0 * step;
      pts = 33;
      best_t[0] = std::cos(center);
      best_t[1] = std::sin(center);
    }
  } else {
    Philox rng(0x6f7261636c65ull, 0);
    int global = std::min(coarse, 1024);
    for (int k = 0; k < global; ++k) {
      double t[4], n2 = 0.0;
      for (double& c : t) {
        c = rng.next_normal();
        n2 += c * c;
      }
      if (n2 == 0.0) continue;
      double inv = 1.0 / std::sqrt(n2);
      for (double& c : t) c *= inv;
      double s = shifted_sqdist(z, w, 4, t);
      if (s < best_sq) {
        best_sq = s;
        std::copy(t, t + 4, best_t);
      }
    }
    // tangent-grid refinement around the best unit quaternion
    double h = 0.3;
    for (int round = 0; round < 8; ++round, h /= 4.0) {
      double center[4];
      std::copy(best_t, best_t + 4, center);
      // orthonormal tangent frame at `center` by Gram-Schmidt on axes
      double frame[3][4];
      int used = 0;
      for (int axis = 0; axis < 4 && used < 3; ++axis) {
        double v[4] = {0, 0, 0, 0};
        v[axis] = 1.0;
        double p = dot(std::span<const double>(v, 4),
                       std::span<const double>(center, 4));
        for (int c = 0; c < 4; ++c) v[c] -= p * center[c];
        for (int u = 0; u < used; ++u) {
          double q = dot(std::span<const double>(v, 4),
                         std::span<const double>(frame[u], 4));
          for (int c = 0; c < 4; ++c) v[c] -= q * frame[u][c];
        }
        double n2 = sqnorm(std::span<const double>(v, 4));
        if (n2 < 1e-12) continue;
        double inv = 1.0 / std::sqrt(n2);
        for (int c = 0; c < 4; ++c) frame[used][c] = v[c] * inv;
        ++used;
      }
      for (int a = -2; a <= 2; ++a)
        for (int b = -2; b <= 2; ++b)
          for (int c = -2; c <= 2; ++c) {
            double t[4], n2 = 0.0;
            for (int q = 0; q < 4; ++q) {
              t[q] = center[q] + h * (a * frame[0][q] + b * frame[1][q] +
                                      c * frame[2][q]);
              n2 += t[q] * t[q];
            }
            double inv = 1.0 / std::sqrt(n2);
            for (int q = 0; q < 4; ++q) t[q] *= inv;
            double s = shifted_sqdist(z, w, 4, t);
            if (s < best_sq) {
              best_sq = s;
              std::copy(t, t + 4, best_t);
            }
          }
    }
  }
  if (flavor == MetricFlavor::kEuclidean)
    return std::sqrt(std::max(0.0, best_sq));
  // geodesic: the same minimizing t maximizes the ambient inner product
  double u = (sqnorm(z) + sqnorm(w) - best_sq) / 2.0;
  return r * std::acos(clamp(u / (r * r), -1.0, 1.0));
}

FiniteMMSpace quotient_space_from_cloud(const PointCloud& cloud, int field_dim,
                                        MetricFlavor flavor, double r) {
  std::size_t k = cloud.count();
  FiniteMMSpace X;
  X.labels = point_labels(static_cast<int>(k));
  X.weights.assign(k, 1.0 / k);
  X.dist.assign(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      double d = quotient_distance(cloud.row(i), cloud.row(j), field_dim,
                                   flavor, r);
      X.dist[i * k + j] = d;
      X.dist[j * k + i] = d;
    }
  return X;
}

FiniteMMSpace sample_sphere(const ModelSpec& spec) {
  PointCloud cloud = sphere_cloud(spec.n + 1, spec.r, spec.k, spec.seed);
  return space_from_cloud(cloud, spec.flavor, spec.r);
}

FiniteMMSpace sample_projective(const ModelSpec& spec) {
  int ambient = spec.field_dim * (spec.n + 1);
  PointCloud cloud = sphere_cloud(ambient, spec.r, spec.k, spec.seed);
  return quotient_space_from_cloud(cloud, spec.field_dim, spec.flavor, spec.r);
}

FiniteMMSpace sample_gaussian(const ModelSpec& spec) {
  if (spec.kind == ModelKind::kGaussianQuotient) {
    PointCloud cloud =
        gaussian_cloud(spec.field_dim * spec.n, spec.lambda, spec.k, spec.seed);
    return quotient_space_from_cloud(cloud, spec.field_dim,
                                     MetricFlavor::kEuclidean);
  }
  PointCloud cloud = gaussian_cloud(spec.n, spec.lambda, spec.k, spec.seed);
  return space_from_cloud(cloud, MetricFlavor::kEuclidean);
}

FiniteMMSpace sample_model(const ModelSpec& spec) {
  switch (spec.kind) {
    case ModelKind::kSphere: return sample_sphere(spec);
    case ModelKind::kProjective: return sample_projective(spec);
    case ModelKind::kGaussian:
    case ModelKind::kGaussianQuotient: return sample_gaussian(spec);
    case ModelKind::kTwoPoint: return two_point(spec.s);
  }
  throw std::invalid_argument("sample_model: unknown kind");
}

FiniteMMSpace two_point(double s) {
  FiniteMMSpace X;
  if (s <= 0.0) {
    X.labels = {"0"};
    X.dist = {0.0};
    X.weights = {1.0};
    return X;
  }
  std::ostringstream lbl;
  lbl << s;
  X.labels = {"0", lbl.str()};
  X.dist = {0.0, s, s, 0.0};
  X.weights = {0.5, 0.5};
  return X;
}

double ks_statistic_normal(std::vector<double> values, double sd) {
  std::sort(values.begin(), values.end());
  std::size_t n = values.size();
  double ks = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double cdf = 0.5 * std::erfc(-values[i] / (sd * std::sqrt(2.0)));
    ks = std::max(ks, std::abs(cdf - static_cast<double>(i) / n));
    ks = std::max(ks, std::abs(static_cast<double>(i + 1) / n - cdf));
  }
  return ks;
}

namespace {
ModelKind kind_from_string(const std::string& s) {
  if (s == "sphere") return ModelKind::kSphere;
  if (s == "projective") return ModelKind::kProjective;
  if (s == "gaussian") return ModelKind::kGaussian;
  if (s == "gaussian_quotient") return ModelKind::kGaussianQuotient;
  if (s == "two_point") return ModelKind::kTwoPoint;
  throw std::invalid_argument("unknown model kind: " + s);
}

const char* kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::kSphere: return "sphere";
    case ModelKind::kProjective: return "projective";
    case ModelKind::kGaussian: return "gaussian";
    case ModelKind::kGaussianQuotient: return "gaussian_quotient";
    case ModelKind::kTwoPoint: return "two_point";
  }
  return "?";
}

int field_from_string(const std::string& s) {
  if (s == "R") return 1;
  if (s == "C") return 2;
  if (s == "H") return 4;
  throw std::invalid_argument("field must be R, C or H");
}
}  // namespace

ModelSpec model_spec_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  ModelSpec spec;
  spec.kind = kind_from_string(j.at("kind").get<std::string>());
  spec.n = j.value("n", 1);
  spec.r = j.value("r", 1.0);
  spec.lambda = j.value("lambda", 1.0);
  if (j.contains("field"))
    spec.field_dim = field_from_string(j["field"].get<std::string>());
  spec.flavor = j.value("flavor", std::string("geodesic")) == "euclidean"
                    ? MetricFlavor::kEuclidean
                    : MetricFlavor::kGeodesic;
  spec.k = j.value("k", 100);
  spec.seed = j.value("seed", std::uint64_t{1});
  spec.s = j.value("s", 1.0);
  if (spec.kind != ModelKind::kTwoPoint && spec.k < 2)
    throw std::invalid_argument("sample count must be >= 2");
  if (spec.r <= 0.0 || spec.lambda <= 0.0)
    throw std::invalid_argument("r and lambda must be positive");
  return spec;
}

std::string model_spec_to_json(const ModelSpec& spec) {
  nlohmann::json j;
  j["kind"] = kind_name(spec.kind);
  j["n"] = spec.n;
  j["r"] = spec.r;
  j["lambda"] = spec.lambda;
  j["field"] = spec.field_dim == 1 ? "R" : spec.field_dim == 2 ? "C" : "H";
  j["flavor"] =
      spec.flavor == MetricFlavor::kEuclidean ? "euclidean" : "geodesic";
  j["k"] = spec.k;
  j["seed"] = spec.seed;
  j["s"] = spec.s;
  return j.dump(2);
}

}  // namespace mmg
