#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "remer/environments.hpp"
#include "remer/learner.hpp"
#include "remer/weighting.hpp"

namespace remer {

/**
 * Declarative experiment description. The on-disk format is one dotted key
 * per line, `key = value`, with '#' comments; unknown keys are rejected with
 * their line number, and echo() prints every key with its resolved value so a
 * parsed config is self-documenting.
 */
struct ExperimentConfig {
  // run.*
  std::string id = "run";
  std::vector<uint64_t> seeds = {0};
  long long metric_every = 500;

  // env.*
  std::string env_name = "chain";  // chain | four_rooms | maze | grid_file
  std::string grid_path;
  int max_episode_steps = 300;
  double reward_noise_sigma = 0.0;
  double gamma_override = -1.0;  // <0 keeps the environment default

  // learner.*
  std::string mode = "q";  // vi | q
  double lr = 0.2;
  int vi_iterations = 400;
  long long steps = 20000;
  int batch_size = 32;
  int target_sync = 100;
  double eps_start = 1.0;
  double eps_end = 0.05;
  double eps_anneal_frac = 0.5;
  int buffer_capacity = 10000;
  std::string update_mode = "weighted";  // weighted | prioritized
  double lr_delta = 0.1;

  // strategy.*
  std::string strategy_kind = "uniform";
  double per_exponent = 1.0;
  double temperature = 7.5;
  std::string ratio_source = "auto";  // auto | unit | exact | lfiw
  bool drop_policy_term = false;

  // tce.*
  double tce_c = 1.0;
  bool tce_c_oracle = false;  // "tce.c = oracle": compute c from Q*
  double tce_gamma = -1.0;    // <0 follows the environment gamma (must be < 1)
  double tce_b1_start = 0.4, tce_b1_end = 0.9;
  double tce_b2_start = 1.6, tce_b2_end = 1.1;
  bool censored_observed = false;  // tce.censored = observed | missing

  // buffer.*
  int h_record_len = 16;
  double fast_fraction = 0.1;

  // lfiw.*
  double lfiw_lr = 0.05;
  int lfiw_batch = 64;
  int lfiw_every = 1;

  // occupancy.*
  double gamma_d = 0.99;

  static ExperimentConfig parse(std::string_view text);
  static ExperimentConfig load(const std::filesystem::path& path);

  /// Canonical text: every key, resolved value, sorted by key.
  std::string echo() const;

  /// Validates cross-field constraints (known names, ranges). Throws ConfigError.
  void check() const;
};

/// Instantiated environment plus the metadata the harness needs.
struct BuiltEnv {
  TabularMdp mdp;
  std::string name;
  bool is_grid = false;
  Gridworld grid;  // valid when is_grid
};

BuiltEnv build_env(const ExperimentConfig& cfg);

/// Strategy with every hyperparameter resolved; `c` resolved from q_star when
/// tce.c = oracle.
WeightingStrategy build_strategy(const ExperimentConfig& cfg, const TabularMdp& mdp,
                                 const QTable* q_star);

QLearnConfig build_learner(const ExperimentConfig& cfg, uint64_t seed);

/// "A..B" or comma list -> seed vector.
std::vector<uint64_t> parse_seed_spec(std::string_view spec);

}  // namespace remer
