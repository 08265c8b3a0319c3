#pragma once

#include <functional>
#include <vector>

#include "remer/environments.hpp"
#include "remer/replay.hpp"
#include "remer/weighting.hpp"

namespace remer {

struct TracePoint {
  long long iteration = 0;
  double td_error_l1 = 0.0;   // mean |B*Q - Q| over legal pairs
  double q_gap_linf = 0.0;    // max |Q - Q*|
  double q_gap_l1 = 0.0;      // mean |Q - Q*|
  double greedy_return = 0.0; // eta of the greedy policy
  double regret = 0.0;
  double weight_entropy = 0.0;
};

struct ViOptions {
  double gamma_d = 0.99;      // occupancy discount for the on-policiness term
  int metric_every = 1;
  const QTable* q_star = nullptr;  // precomputed optimum, solved when null
};

struct ViResult {
  QTable q;
  std::vector<TracePoint> trace;
  long long iterations_to_optimal = -1;  // first k with zero greedy regret
};

/**
 * Synchronous weighted value iteration: each iteration computes strategy
 * weights over the full state-action table (normalized to mean 1) and applies
 * Q += alpha * w * (B*Q - Q), with the per-entry effective step clamped to 1.
 */
ViResult weighted_value_iteration(const TabularMdp& mdp, const WeightingStrategy& strategy,
                                  double alpha, int iterations, const ViOptions& opts = {});

struct QLearnConfig {
  double lr = 0.2;
  long long steps = 20000;
  int batch_size = 32;
  int target_sync = 100;
  double eps_start = 1.0;
  double eps_end = 0.05;
  double eps_anneal_frac = 0.5;  // fraction of training over which eps anneals
  int buffer_capacity = 10000;
  int h_record_len = 16;
  double fast_fraction = 0.1;
  double lr_delta = 0.1;
  double lfiw_lr = 0.05;
  int lfiw_batch = 64;
  int lfiw_every = 1;
  int max_episode_steps = 300;
  double reward_noise_sigma = 0.0;
  long long metric_every = 500;
  uint64_t seed = 0;
  double gamma_d = 0.99;
  enum class UpdateMode { kWeighted, kPrioritized };
  UpdateMode update_mode = UpdateMode::kWeighted;
};

/// Observation points for tests and the experiment harness.
struct QLearnHooks {
  std::function<void(long long step, std::span<const SampledTransition>,
                     std::span<const double> weights, const WeightContext&)>
      on_batch;
  std::function<void(long long step, std::span<const Transition> episode)> on_episode_end;
  /// Fires on the metric cadence with read access to the live tables.
  std::function<void(long long step, const QTable& q, const ReplayBuffer& buffer)> on_checkpoint;
};

struct QLearnResult {
  QTable q;
  std::vector<TracePoint> trace;
  long long warmup_skips = 0;
  long long episodes = 0;
};

/**
 * Episodic tabular Q-learning with replay: act epsilon-greedily, store, sample
 * a batch, weight it with the strategy, and take weighted TD steps; Delta and
 * kappa estimators update on the same cadence when the strategy uses them.
 */
QLearnResult weighted_q_learning(const TabularMdp& mdp, const WeightingStrategy& strategy,
                                 const QLearnConfig& cfg, const QLearnHooks& hooks = {});

}  // namespace remer
