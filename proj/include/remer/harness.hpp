#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "remer/config.hpp"
#include "remer/learner.hpp"
#include "remer/metrics.hpp"

namespace remer {

inline constexpr const char* kCodeVersion = "remer 0.1.0";

/// Runs every (config, seed) pair and returns rows sorted by
/// (config id, seed, iteration). Worker threads own their runs; output is
/// independent of the job count.
std::vector<MetricsRow> run_config_rows(const ExperimentConfig& cfg, int jobs = 1);

struct RunOutputs {
  std::filesystem::path metrics_csv;
  std::filesystem::path manifest;
  std::filesystem::path summary;
  uint64_t metrics_hash = 0;
};

/// Executes a config and writes <id>_metrics.csv, <id>_manifest.txt and
/// <id>_summary.txt under out_dir. Rerunning the same config is byte-identical
/// unless `timing` is set.
RunOutputs run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                          int jobs = 1, bool timing = false);

// ---- Reproduction recipes (bundled configs) ----

struct Fig1Report {
  ViResult uniform, per, discor;
  long long iters_uniform = -1, iters_per = -1, iters_discor = -1;
  bool per_td_lower_early = false;      // PER mean TD error below Uniform on the early window
  bool discor_gap_lower_early = false;  // DisCor mean |Q-Q*| below Uniform on the early window
  bool uniform_beats_per = false;
  bool uniform_beats_discor = false;
  std::vector<std::string> summary;
};
Fig1Report run_fig1();
Fig1Report repro_fig1(const std::filesystem::path& out_dir);

struct GridTceReport {
  struct EnvBlock {
    std::string env;
    long long budget = 0;
    int seeds = 0;
    double gap_uniform = 0, gap_discor = 0, gap_tce = 0, gap_oracle = 0;
    bool ordering_ok = false;
  };
  std::vector<EnvBlock> envs;
  bool ok = false;
  std::vector<std::string> summary;
};
GridTceReport run_gridworld_tce();
GridTceReport repro_gridworld_tce(const std::filesystem::path& out_dir);

struct NoiseReport {
  bool distances_invariant = false;  // matched seeds, sigma in {0, 0.5}
  double final_regret_remert = 0, final_regret_uniform = 0;  // seed-averaged, sigma = 0.5
  bool remert_not_worse = false;
  std::vector<std::string> summary;
};
NoiseReport run_noise();
NoiseReport repro_noise(const std::filesystem::path& out_dir);

struct HCorrelationReport {
  struct Row {
    long long step;
    double spearman;  // rank correlation of recorded h vs |B*Q - Q*|
    int pairs;
  };
  std::vector<Row> rows;
  std::vector<std::string> summary;
};
HCorrelationReport run_h_correlation();
HCorrelationReport repro_h_correlation(const std::filesystem::path& out_dir);

struct HVarianceReport {
  struct Row {
    long long step;
    double mean_h_variance;    // over states in the recent-visit window
    double mean_episode_len;
  };
  std::vector<Row> rows;
  std::vector<std::string> summary;
};
HVarianceReport run_h_variance();
HVarianceReport repro_h_variance(const std::filesystem::path& out_dir);

struct RecurrenceRow {
  long long checkpoint = 0;  // 0 = initial uniform-random policy
  double eps_pi = 0.0;
};
std::vector<RecurrenceRow> estimate_recurrence(const ExperimentConfig& cfg);
std::filesystem::path write_recurrence_csv(const ExperimentConfig& cfg,
                                           const std::vector<RecurrenceRow>& rows,
                                           const std::filesystem::path& out_dir);

}  // namespace remer
