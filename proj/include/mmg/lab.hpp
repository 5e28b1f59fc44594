#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace mmg {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string experiment;  // sphere-convergence | counterexample |
                           // condition-matrix
  std::string model = "sphere";       // sphere | projective
  std::string field = "R";            // projective / quotient scalar field
  std::string lambda_rule = "constant";  // r_n = sqrt(n); "vanishing":
                                         // r_n = n^{1/4}
  std::vector<int> indices{10, 100, 800};
  int k = 2000;
  std::vector<int> projections{1, 2};
  std::string selector = "fn2";  // counterexample construction
  std::vector<std::string> families{"identity", "fn1", "fn2", "fn3",
                                    "chordal_sqrt_n"};
  std::uint64_t seed = 1;
  int threads = 1;
  double tol = 1e-3;

  static ExperimentConfig from_json(const std::string& text);
  nlohmann::json to_json() const;
};

struct ExperimentReport {
  nlohmann::json body;
  bool ok = true;

  std::string to_json() const { return body.dump(2); }
};

ExperimentReport run_sphere_convergence(const ExperimentConfig& cfg);
ExperimentReport run_counterexample(const ExperimentConfig& cfg);
ExperimentReport run_condition_matrix(const ExperimentConfig& cfg);
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// Trajectory CSV (index, metric, value, method) for report consumers.
std::string report_metrics_csv(const ExperimentReport& rep);

int cli_main(int argc, const char* const* argv);

}  // namespace mmg
