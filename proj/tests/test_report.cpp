#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "membrane/experiments.hpp"
#include "membrane/report.hpp"

using namespace membrane;

TEST_CASE("csv round-trips doubles at 17 significant digits") {
  std::mt19937 rng(23);
  std::normal_distribution<double> gauss;
  std::vector<double> values;
  for (int i = 0; i < 200; ++i) values.push_back(std::exp(8.0 * gauss(rng)) * gauss(rng));
  values.push_back(0.0);
  values.push_back(-1.0 / 3.0);

  CsvWriter csv({"index", "value", "label"});
  for (std::size_t i = 0; i < values.size(); ++i)
    csv.row({static_cast<long long>(i), values[i], std::string("row,with\"quote")});
  csv.save("roundtrip_test.csv");

  const auto rows = read_csv("roundtrip_test.csv");
  REQUIRE(rows.size() == values.size() + 1);
  CHECK(rows[0][1] == "value");
  for (std::size_t i = 0; i < values.size(); ++i) {
    CHECK(std::stod(rows[i + 1][1]) == values[i]);
    CHECK(rows[i + 1][2] == "row,with\"quote");
  }
  std::remove("roundtrip_test.csv");
}

TEST_CASE("identical configuration produces byte-identical csv output") {
  ModelParams params;
  ExperimentConfig config;
  config.level_min = 2;
  config.level_max = 4;
  config.output_dir = "determinism_a";
  run_convergence(config);
  config.output_dir = "determinism_b";
  run_convergence(config);
  for (const char* name : {"convergence.csv", "convergence_eoc.csv"}) {
    std::ifstream a(std::string("determinism_a/") + name), b(std::string("determinism_b/") + name);
    const std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    const std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
    CHECK(!sa.empty());
  }
  std::filesystem::remove_all("determinism_a");
  std::filesystem::remove_all("determinism_b");
}

TEST_CASE("config file parsing") {
  {
    std::ofstream out("test_config.txt");
    out << "# comment line\n";
    out << "kappa 2.0\n";
    out << "sigma = 0.5\n";
    out << "level 4\n";
    out << "beta 1e7\n";
    out << "output_dir results\n";
  }
  const auto config = load_config_file("test_config.txt");
  CHECK(config.params.kappa == 2.0);
  CHECK(config.params.sigma == 0.5);
  CHECK(config.level == 4);
  CHECK(config.beta == 1e7);
  CHECK(config.output_dir == "results");
  CHECK(config.beta_value() == 1e7);
  std::remove("test_config.txt");

  {
    std::ofstream out("test_config_bad.txt");
    out << "no_such_key 1\n";
  }
  CHECK_THROWS_AS(load_config_file("test_config_bad.txt"), std::runtime_error);
  std::remove("test_config_bad.txt");
}

TEST_CASE("manifest records parameters") {
  RunManifest manifest("unit-test");
  manifest.set("beta", 1e8);
  manifest.set("level", static_cast<long long>(4));
  manifest.set_array("delta_per_level", {0.1, 0.2});
  manifest.add_file("a.csv");
  manifest.add_timing("total", 12.5);
  manifest.save("manifest_test.json");
  std::ifstream in("manifest_test.json");
  const std::string contents((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  CHECK(contents.find("\"experiment\": \"unit-test\"") != std::string::npos);
  CHECK(contents.find("\"beta\": 100000000.0") != std::string::npos);
  CHECK(contents.find("a.csv") != std::string::npos);
  std::remove("manifest_test.json");
}
