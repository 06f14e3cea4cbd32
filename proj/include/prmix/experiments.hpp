#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "prmix/group.hpp"

namespace prmix {

struct ExperimentConfig {
  std::string group = "Z2";
  std::vector<int> n{128};
  std::uint64_t seed = 1;
  std::size_t replicas = 200;
  std::vector<double> betas{4.0, 6.0, 8.0};
  std::vector<double> R{2.0, 4.0, 8.0};
  // Times (3/2) n ln n + beta n for these beta.
  std::vector<double> grid_betas{-8, -6, -4, -2, 0, 2, 4, 6, 8};
  std::string out_dir;
  // "exact", "mc" or "both" for the cutoff profile.
  std::string mode = "exact";
  std::optional<std::string> irrep_file;
  bool persistence = false;

  // Throws InvalidArgument.
  void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::string& path);

struct ExperimentReport {
  std::string name;
  // file name -> contents
  std::map<std::string, std::string> csv;
  nlohmann::json summary;
  bool bounds_ok = true;
};

// Seed for one (experiment, n) cell; replicas use Rng(cell_seed, r).
std::uint64_t cell_seed(std::uint64_t seed, const std::string& tag, int n);

std::vector<std::int64_t> cutoff_grid(int n, const std::vector<double>& betas);

ExperimentReport run_cutoff_profile(const ExperimentConfig& cfg);
ExperimentReport run_burnin(const ExperimentConfig& cfg);
ExperimentReport run_fourier_decay(const ExperimentConfig& cfg);
ExperimentReport run_lower_bound(const ExperimentConfig& cfg);

struct McTvBounds {
  std::vector<std::int64_t> times;
  std::vector<double> lower;  // statistic KS minus DKW margins, floored at 0
  std::vector<double> upper;  // 99% upper CI of Pr(not coalesced), 1 before burn-in
  std::int64_t burn_in = 0;
  std::int64_t p = 0;
};

// Monte Carlo TV bounds for the chain started from star_config(g, n).
McTvBounds mc_tv_bounds(const GroupPtr& g, int n, const std::vector<std::int64_t>& times, std::size_t replicas,
                        std::uint64_t seed, const std::optional<std::string>& irrep_file = std::nullopt);

struct FourierDecay {
  std::vector<std::int64_t> times;
  std::vector<double> mean_max_y;
  std::vector<double> se_max_y;
  std::vector<double> mean_max_x;
  double slope = 0.0;
  double slope_se = 0.0;
  std::size_t fit_points = 0;
  double initial_max_y = 0.0;  // largest max_a |y_a(0)| over replicas
  std::int64_t horizon = 0;    // ceil(n ln n / 2)
  std::vector<double> final_max_y;  // per replica at the horizon
};

FourierDecay fourier_decay(const GroupPtr& g, int n, std::size_t replicas, std::uint64_t seed,
                           const std::optional<std::string>& irrep_file = std::nullopt);

// Writes every CSV and summary.json under dir (created if missing).
void write_report(const ExperimentReport& rep, const std::string& dir);
nlohmann::json environment_metadata();

}  // namespace prmix
