#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "prmix/error.hpp"
#include "prmix/experiments.hpp"

using namespace prmix;
using nlohmann::json;

TEST(Config, JsonRoundTrip) {
  ExperimentConfig c;
  c.group = "S3";
  c.n = {30, 60};
  c.seed = 77;
  c.replicas = 12;
  c.betas = {2.0, 5.0};
  c.R = {1.5};
  c.grid_betas = {-1, 1};
  c.out_dir = "out";
  c.mode = "both";
  c.irrep_file = "x.json";
  c.persistence = true;
  const ExperimentConfig d = config_from_json(config_to_json(c));
  EXPECT_EQ(config_to_json(d), config_to_json(c));
  EXPECT_EQ(d.n, c.n);
  EXPECT_EQ(d.irrep_file, c.irrep_file);
  EXPECT_EQ(config_from_json(json{{"n", 50}}).n, std::vector<int>{50});
  EXPECT_EQ(config_from_json(json::object()).group, "Z2");
}

TEST(Config, LoadFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "prmix_cfg_test.json";
  std::ofstream(path) << R"({"group": "Z3", "n": [40], "replicas": 5, "mode": "exact"})";
  const ExperimentConfig c = load_config(path.string());
  EXPECT_EQ(c.group, "Z3");
  EXPECT_EQ(c.replicas, 5u);
  std::filesystem::remove(path);
  EXPECT_THROW(load_config("/nonexistent/prmix.json"), Error);
}

TEST(Config, Validation) {
  ExperimentConfig c;
  c.mode = "fast";
  EXPECT_THROW(c.validate(), Error);
  c = ExperimentConfig{};
  c.n.clear();
  EXPECT_THROW(c.validate(), Error);
  c = ExperimentConfig{};
  c.R = {0.0};
  EXPECT_THROW(c.validate(), Error);
  c = ExperimentConfig{};
  c.replicas = 0;
  EXPECT_THROW(c.validate(), Error);
  EXPECT_NO_THROW(ExperimentConfig{}.validate());
}

TEST(Experiments, SeedsAndGrid) {
  EXPECT_EQ(cell_seed(1, "cutoff", 64), cell_seed(1, "cutoff", 64));
  EXPECT_NE(cell_seed(1, "cutoff", 64), cell_seed(1, "burnin", 64));
  EXPECT_NE(cell_seed(1, "cutoff", 64), cell_seed(1, "cutoff", 65));
  EXPECT_NE(cell_seed(1, "cutoff", 64), cell_seed(2, "cutoff", 64));
  const auto grid = cutoff_grid(1000, {-8, 0, 8});
  const double base = 1500 * std::log(1000.0);
  EXPECT_EQ(grid[1], std::llround(base));
  EXPECT_EQ(grid[0], std::llround(base - 8000));
  EXPECT_EQ(grid[2], std::llround(base + 8000));
  EXPECT_EQ(cutoff_grid(4, {-100})[0], 0);
}

TEST(Experiments, CutoffProfileExact) {
  ExperimentConfig c;
  c.n = {32, 64};
  const ExperimentReport rep = run_cutoff_profile(c);
  EXPECT_EQ(rep.name, "cutoff");
  ASSERT_EQ(rep.summary["per_n"].size(), 2u);
  for (const auto& cell : rep.summary["per_n"]) {
    EXPECT_TRUE(cell["monotone"].get<bool>());
    EXPECT_GT(cell["t_mix_quarter"].get<int>(), cell["t_mix_three_quarters"].get<int>());
    EXPECT_GT(cell["ratio"].get<double>(), 1.0);
  }
  EXPECT_TRUE(rep.summary.contains("collapse_spread"));
  const std::string& csv = rep.csv.at("cutoff.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "n,beta,t,d,method");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 2 * 9);
}

TEST(Experiments, CutoffMonteCarloBracketsExact) {
  ExperimentConfig c;
  c.n = {24};
  c.mode = "both";
  c.replicas = 150;
  c.grid_betas = {-4, 0, 4};
  const ExperimentReport rep = run_cutoff_profile(c);
  EXPECT_TRUE(rep.summary["per_n"][0]["mc_brackets_exact"].get<bool>());
}

TEST(Experiments, BurninIsReproducible) {
  ExperimentConfig c;
  c.n = {40};
  c.replicas = 30;
  c.seed = 9;
  const ExperimentReport a = run_burnin(c), b = run_burnin(c);
  EXPECT_EQ(a.csv, b.csv);
  EXPECT_TRUE(a.bounds_ok);
  c.seed = 10;
  EXPECT_NE(run_burnin(c).csv.at("burnin_tau.csv"), a.csv.at("burnin_tau.csv"));
}

TEST(Experiments, FourierDecaySmall) {
  ExperimentConfig c;
  c.group = "Z3";
  c.n = {60};
  c.replicas = 10;
  const ExperimentReport rep = run_fourier_decay(c);
  const auto& cell = rep.summary["per_n"][0];
  EXPECT_TRUE(cell["initial_ok"].get<bool>());
  EXPECT_EQ(cell["horizon"].get<std::int64_t>(), static_cast<std::int64_t>(std::ceil(30 * std::log(60.0))));
  EXPECT_FALSE(rep.csv.at("fourier.csv").empty());
}

TEST(Experiments, LowerBoundSmall) {
  ExperimentConfig c;
  c.n = {64};
  c.replicas = 50;
  const ExperimentReport rep = run_lower_bound(c);
  const auto& cell = rep.summary["per_n"][0];
  EXPECT_GE(cell["exact_d_minus_8n"].get<double>(), cell["exact_d_plus_8n"].get<double>());
  EXPECT_EQ(cell["identity_tail"].size(), 3u);
  EXPECT_EQ(rep.csv.size(), 3u);
}

TEST(Experiments, WriteReport) {
  ExperimentConfig c;
  c.n = {16};
  c.grid_betas = {0};
  const ExperimentReport rep = run_cutoff_profile(c);
  const auto dir = std::filesystem::temp_directory_path() / "prmix_report_test";
  std::filesystem::remove_all(dir);
  write_report(rep, dir.string());
  EXPECT_TRUE(std::filesystem::exists(dir / "cutoff.csv"));
  std::ifstream f(dir / "cutoff_summary.json");
  const json s = json::parse(f);
  EXPECT_TRUE(s.contains("environment"));
  EXPECT_EQ(s["experiment"], "cutoff");
  std::filesystem::remove_all(dir);
}
