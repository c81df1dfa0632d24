#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "hisnot/config.hpp"

using namespace hisnot;

TEST_CASE("config: full round trip with defaults resolved") {
  nlohmann::json j = {
      {"dataset", "one-to-many"},
      {"basis", {{"kind", "fourier"}, {"num_modes", 16}}},
      {"covariance", "inv_k2"},
      {"schedule", {{"sigma_max", 0.5}, {"sigma_min", 0.06}}},
      {"trainer", {{"epochs", 100}, {"batch_size", 64}}},
      {"seeds", {{"data", 10}, {"noise", 20}, {"init", 30}, {"eval", 40}}},
      {"output_dir", "runs/x"},
  };
  const ExperimentConfig c = config_from_json(j);
  CHECK(c.dataset == DatasetKind::OneToMany);
  CHECK(c.trainer.epochs == 100);
  CHECK(c.trainer.batch_size == 64);
  CHECK(c.trainer.inner_steps == 5);  // default preserved
  CHECK(c.trainer.seeds.eval == 40);
  CHECK(c.schedule.active_fraction == 0.8);

  // resolved form re-parses to the same resolved form (fixpoint)
  const nlohmann::json r1 = config_to_json(c);
  const ExperimentConfig c2 = config_from_json(r1);
  CHECK(config_to_json(c2) == r1);
  CHECK(r1.dump(2) == config_to_json(c2).dump(2));
}

TEST_CASE("config: unknown keys rejected with the offending path") {
  nlohmann::json j = {{"dataset", "perpendicular"}, {"typo_field", 3}};
  CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("typo_field"), ConfigError);

  nlohmann::json j2 = {{"dataset", "perpendicular"}, {"trainer", {{"lr", 0.1}}}};
  CHECK_THROWS_WITH_AS(config_from_json(j2), doctest::Contains("trainer"), ConfigError);

  nlohmann::json j3 = {{"dataset", "nope"}};
  CHECK_THROWS_AS(config_from_json(j3), ConfigError);

  nlohmann::json j4;  // dataset is required
  CHECK_THROWS_AS(config_from_json(j4), ConfigError);
}

TEST_CASE("config: dataset aliases from the two naming schemes") {
  nlohmann::json j = {{"dataset", "horizontal"}};
  CHECK(config_from_json(j).dataset == DatasetKind::Parallel);
  j["dataset"] = "multi-perpendicular";
  CHECK(config_from_json(j).dataset == DatasetKind::Grid);
}

TEST_CASE("config: covariance presets and explicit eigenvalues") {
  nlohmann::json j = {{"dataset", "perpendicular"}, {"covariance", "inv_k2"}};
  ExperimentConfig c = config_from_json(j);
  const CovarianceSpec inv = c.covariance_spec();
  CHECK(inv.eigenvalues[0] == 1.0);
  CHECK(inv.eigenvalues[3] == doctest::Approx(1.0 / 16.0));
  CHECK(inv.kernel().empty());

  j["covariance"] = "kernel_at:1";
  const CovarianceSpec k1 = config_from_json(j).covariance_spec();
  CHECK(k1.kernel() == std::vector<int>{1});
  CHECK(k1.eigenvalues[0] == 1.0);

  std::vector<double> lam(16, 0.1);
  j["covariance"] = lam;
  const CovarianceSpec expl = config_from_json(j).covariance_spec();
  CHECK(expl.eigenvalues[7] == 0.1);

  lam.pop_back();
  j["covariance"] = lam;
  CHECK_THROWS_AS(config_from_json(j), ConfigError);

  j["covariance"] = "mystery";
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
}

TEST_CASE("config: file I/O with line diagnostics") {
  const std::string good = "test_config_good.tmp.json";
  {
    std::ofstream os(good);
    os << R"({"dataset": "parallel", "output_dir": "runs/p"})";
  }
  const ExperimentConfig c = load_config(good);
  CHECK(c.dataset == DatasetKind::Parallel);
  std::remove(good.c_str());

  const std::string bad = "test_config_bad.tmp.json";
  {
    std::ofstream os(bad);
    os << "{\n\"dataset\": \"parallel\",\n  oops\n}\n";
  }
  CHECK_THROWS_WITH_AS(load_config(bad), doctest::Contains(":3:"), ConfigError);
  std::remove(bad.c_str());

  CHECK_THROWS_AS(load_config("does_not_exist.json"), ConfigError);
}

TEST_CASE("config: validation catches bad values") {
  nlohmann::json j = {{"dataset", "perpendicular"}, {"schedule", {{"sigma_min", 0.9}}}};
  CHECK_THROWS(config_from_json(j));  // sigma_min > sigma_max

  nlohmann::json j2 = {{"dataset", "perpendicular"}, {"trainer", {{"batch_size", 1}}}};
  CHECK_THROWS(config_from_json(j2));

  nlohmann::json j3 = {{"dataset", "perpendicular"}, {"eval", {{"n", 1}}}};
  CHECK_THROWS_AS(config_from_json(j3), ConfigError);
}
