#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <string>
#include <vector>

#include "mmg/lab.hpp"

using namespace mmg;

namespace {

int run_cli(std::initializer_list<const char*> args) {
  std::vector<const char*> argv{"mmgeo"};
  argv.insert(argv.end(), args.begin(), args.end());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

nlohmann::json strip_timing(nlohmann::json j) {
  j.erase("timing");
  return j;
}

}  // namespace

TEST_CASE("config parsing: defaults, overrides and rejects") {
  ExperimentConfig cfg = ExperimentConfig::from_json(
      "{\"experiment\":\"counterexample\",\"selector\":\"fn3\",\"seed\":9}");
  CHECK(cfg.selector == "fn3");
  CHECK(cfg.seed == 9);
  CHECK(cfg.k == 2000);
  CHECK(cfg.indices == std::vector<int>{10, 100, 800});
  CHECK_THROWS_AS(ExperimentConfig::from_json("not json"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json("{\"k\":1}"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json("{\"indices\":[]}"),
                  ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json("{\"model\":\"torus\"}"),
                  ConfigError);
}

TEST_CASE("config json omits runtime plumbing") {
  ExperimentConfig cfg;
  cfg.threads = 7;
  CHECK(!cfg.to_json().contains("threads"));
}

TEST_CASE("unknown experiment throws") {
  ExperimentConfig cfg;
  cfg.experiment = "warp-drive";
  CHECK_THROWS_AS(run_experiment(cfg), ConfigError);
}

TEST_CASE("counterexample fn3 report") {
  ExperimentConfig cfg;
  cfg.experiment = "counterexample";
  cfg.selector = "fn3";
  cfg.seed = 7;
  ExperimentReport rep = run_counterexample(cfg);
  CHECK(rep.ok);
  CHECK(rep.body["verdicts"]["b_fails"] == true);
  CHECK(rep.body["verdicts"]["iii_holds"] == true);
  CHECK(rep.body["experiment"] == "counterexample");
  CHECK(rep.body.contains("timing"));
}

TEST_CASE("condition matrix annotates hypothesis sets") {
  ExperimentConfig cfg;
  cfg.experiment = "condition-matrix";
  cfg.families = {"identity", "fn2"};
  ExperimentReport rep = run_condition_matrix(cfg);
  auto& m = rep.body["results"]["matrix"];
  REQUIRE(m.size() == 2);
  CHECK(m[0]["family"] == "identity");
  CHECK(m[0]["hypothesis_sets"].size() == 2);
  CHECK(m[1]["hypothesis_sets"].empty());
}

TEST_CASE("small sphere-convergence run is deterministic across threads") {
  ExperimentConfig cfg;
  cfg.experiment = "sphere-convergence";
  cfg.indices = {4, 9};
  cfg.k = 120;
  cfg.seed = 7;
  cfg.threads = 1;
  ExperimentReport a = run_experiment(cfg);
  cfg.threads = 3;
  ExperimentReport b = run_experiment(cfg);
  CHECK(strip_timing(a.body).dump() == strip_timing(b.body).dump());
  CHECK(a.body["results"]["per_n"].size() == 2);
  CHECK(a.body["verdicts"].contains("chordal_identity"));
  std::string csv = report_metrics_csv(a);
  CHECK(csv.rfind("index,metric,value", 0) == 0);
  CHECK(csv.find("observable_prokhorov") != std::string::npos);
}

TEST_CASE("vanishing lambda rule heads to a point mass") {
  ExperimentConfig cfg;
  cfg.experiment = "sphere-convergence";
  cfg.lambda_rule = "vanishing";
  cfg.indices = {10, 40, 160};
  cfg.k = 200;
  cfg.seed = 7;
  ExperimentReport rep = run_experiment(cfg);
  auto& rows = rep.body["results"]["per_n"];
  double first = rows[0]["observable_prokhorov"].get<double>();
  double last = rows[2]["observable_prokhorov"].get<double>();
  CHECK(last < first);  // concentration around 0 tightens
}

TEST_CASE("cli: validation, exit codes and expectations") {
  CHECK(run_cli({"validate-mpf", "--builtin", "identity"}) == 0);
  CHECK(run_cli({"validate-mpf", "--builtin", "square",
                 "--expect-preserving"}) == 2);
  CHECK(run_cli({"no-such-command"}) == 1);
  CHECK(run_cli({"dist", "--metric", "warp", "--a", "/nonexistent"}) == 1);
}

TEST_CASE("cli: experiment verdict expectations drive exit 2") {
  std::string cfg_path = "/tmp/mmgeo_test_cfg.json";
  std::FILE* f = std::fopen(cfg_path.c_str(), "w");
  std::fputs("{\"experiment\":\"counterexample\",\"selector\":\"fn3\"}", f);
  std::fclose(f);
  CHECK(run_cli({"experiment", "--config", cfg_path.c_str(), "--seed", "7",
                 "--out", "/tmp/mmgeo_test_rep.json", "--expect",
                 "b_fails=true"}) == 0);
  CHECK(run_cli({"experiment", "--config", cfg_path.c_str(), "--seed", "7",
                 "--expect", "b_fails=false"}) == 2);
  CHECK(run_cli({"experiment", "--config", cfg_path.c_str(), "--seed", "7",
                 "--expect", "no_such_verdict=true"}) == 1);
  CHECK(run_cli({"report", "--in", "/tmp/mmgeo_test_rep.json"}) == 0);
}
