#pragma once

#include <span>

#include "remer/mdp.hpp"
#include "remer/replay.hpp"
#include "remer/solve.hpp"

namespace remer {

/// Exponential moving average; the first observation seeds the value.
class EmaTracker {
 public:
  explicit EmaTracker(double rate = 0.01) : rate_(rate) {}
  void observe(double x) {
    if (!init_) {
      value_ = x;
      init_ = true;
    } else {
      value_ += rate_ * (x - value_);
    }
  }
  bool initialized() const { return init_; }
  double value(double fallback = 1.0) const { return init_ ? value_ : fallback; }
  double rate() const { return rate_; }

 private:
  double rate_;
  double value_ = 0.0;
  bool init_ = false;
};

/**
 * Temporal-correctness estimate configuration: discount, suboptimality
 * constant c, and the time-adaptive clip bounds [b1(t), b2(t)] interpolated
 * linearly in training progress.
 */
struct TceConfig {
  double gamma = 0.99;
  double c = 1.0;  // max_{s,a}(V*(s) - Q*(s,a)) when an oracle supplies it
  double b1_start = 0.4, b1_end = 0.9;
  double b2_start = 1.6, b2_end = 1.1;
  double progress = 0.0;  // fraction of training elapsed, in [0,1]

  double lower() const { return b1_start + (b1_end - b1_start) * progress; }
  double upper() const { return b2_start + (b2_end - b2_start) * progress; }
  double midpoint() const { return 0.5 * (lower() + upper()); }
};

/// f(h)(L + c) + gamma^{h+1} c with f(h) = (gamma - gamma^{h+1}) / (1 - gamma);
/// pre-clipping. Strictly increasing in h: the increment is gamma^{h+1}(L + gamma c).
double raw_tce(int h, double gamma, double c, double mean_td_error);

/// raw_tce clipped into [b1(t), b2(t)].
double tce(int h, const TceConfig& cfg, double mean_td_error);

/**
 * Mean of raw_tce over the recorded distance-to-end window, clipped after
 * averaging. Censored observations are skipped unless include_censored; an
 * empty (or fully skipped) record falls back to the clip midpoint.
 */
double expected_tce(std::span<const ReplayBuffer::HEntry> record, const TceConfig& cfg,
                    double mean_td_error, bool include_censored = false);

/// Same, reading the record straight out of a replay buffer.
double expected_tce(const ReplayBuffer& buffer, StateId s, ActionId a, const TceConfig& cfg,
                    double mean_td_error, bool include_censored = false);

/// Entrywise |q - q_star|.
GapTable oracle_q_gap(const QTable& q, const QTable& q_star);

/**
 * Bootstrapped estimate of the cumulative target error:
 * Delta(s,a) tracks |Q - B*Q_prev| + gamma * Delta(s', a_hat).
 */
class DeltaEstimator {
 public:
  DeltaEstimator(const TabularMdp& mdp, double lr = 0.05)
      : table_(mdp, 0.0), lr_(lr) {}

  /// |q_value - y| + gamma * Delta(s', a_hat); terminal s' contributes 0.
  static double bootstrap_target(double q_value, double y, const DeltaTable& delta,
                                 StateId s_next, ActionId a_hat, double gamma,
                                 bool next_terminal);

  /// Moves Delta(s,a) toward a nonnegative target by lr.
  void update(StateId s, ActionId a, double target);

  /// Synchronous exact sweep: Delta <- |q_new - bstar_prev| + gamma P^{pi_prev} Delta.
  void exact_sweep(const QTable& q_new, const QTable& bstar_prev, const PolicyTable& pi_prev,
                   const TabularMdp& mdp);

  /// gamma * Delta(s', a_hat) from one observed transition (0 past terminals).
  double sample_penalty(StateId s_next, ActionId a_hat, double gamma, bool next_terminal) const;

  /// gamma * [P^{pi} Delta](s,a) with the true transition matrix.
  double exact_penalty(const TabularMdp& mdp, const PolicyTable& pi, StateId s, ActionId a) const;
  std::vector<double> exact_penalties(const TabularMdp& mdp, const PolicyTable& pi) const;

  const DeltaTable& table() const { return table_; }
  double lr() const { return lr_; }

 private:
  DeltaTable table_;
  double lr_;
};

/**
 * Tabular likelihood-free importance weighting under the KL generator
 * f(u) = u log u, so f'(u) = log u + 1 and f*(t) = exp(t - 1). kappa is
 * parameterized as exp(theta) and stays positive; at the optimum it equals
 * the density ratio fast/slow.
 */
class LfiwEstimator {
 public:
  explicit LfiwEstimator(const TabularMdp& mdp) : theta_(mdp, 0.0) {}

  /// One SGD step on E_slow[kappa] - E_fast[log kappa + 1] from two sampled
  /// batches of (s,a) table indices.
  void update(std::span<const int> fast_sa, std::span<const int> slow_sa, double lr);

  double kappa(StateId s, ActionId a) const { return std::exp(theta_(s, a)); }
  double kappa_index(int sa) const { return std::exp(theta_.at_index(sa)); }
  RatioTable ratios() const;

 private:
  RatioTable theta_;  // log kappa
};

/// In-place kappa^(1/T) / mean(kappa^(1/T)); the argmax entry is preserved
/// and the mean becomes 1.
void normalize_ratios(std::span<double> ratios, double temperature);

}  // namespace remer
