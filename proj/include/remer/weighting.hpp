#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "remer/estimators.hpp"

namespace remer {

enum class StrategyKind {
  kUniform,
  kPer,
  kDisCor,
  kReMern,
  kReMert,
  kOracle,
  kFullTheorem,
};

enum class RatioSource {
  kAuto,  // exact occupancy ratio when the transition matrix is available, else LFIW
  kUnit,
  kExact,
  kLfiw,
};

const char* to_string(StrategyKind k);
const char* to_string(RatioSource r);
std::optional<StrategyKind> parse_strategy_kind(std::string_view name);
std::optional<RatioSource> parse_ratio_source(std::string_view name);
std::string strategy_names();  // comma-separated, for error messages

/// A named weighting rule plus its hyperparameters. compute_weights() output
/// is always nonnegative with batch mean 1.
struct WeightingStrategy {
  StrategyKind kind = StrategyKind::kUniform;
  double per_exponent = 1.0;
  double priority_floor = 1e-6;
  double temperature = 7.5;  // LFIW ratio normalization temperature
  RatioSource ratio_source = RatioSource::kAuto;
  TceConfig tce;
  bool drop_policy_term = false;    // continuous-action form: drop (2 - pi)
  bool censored_h_observed = false; // treat timeout distances as observed

  bool needs_ratio() const {
    return kind == StrategyKind::kReMern || kind == StrategyKind::kReMert ||
           kind == StrategyKind::kOracle || kind == StrategyKind::kFullTheorem;
  }
  bool needs_delta() const {
    return kind == StrategyKind::kDisCor || kind == StrategyKind::kReMern;
  }
  bool needs_tce() const { return kind == StrategyKind::kReMert; }
  bool needs_q_star() const {
    return kind == StrategyKind::kOracle || kind == StrategyKind::kFullTheorem;
  }
  bool needs_lfiw() const {
    return needs_ratio() && (ratio_source == RatioSource::kLfiw);
  }
};

/**
 * Per-sample inputs prepared by the caller for one batch. Only the vectors a
 * strategy consumes must be filled; each must then match the batch size.
 * `ratio` may stay empty for a unit on-policiness term.
 */
struct WeightContext {
  int batch = 0;
  std::vector<double> td_error_abs;    // PER, FullTheorem term (d)
  std::vector<double> ratio;           // d^pi/mu, already normalized upstream
  std::vector<double> discor_penalty;  // gamma [P Delta](s,a)
  std::vector<double> expected_tce;    // clipped E[TCE]
  std::vector<double> q_gap;           // hindsight |Q - Q*| surrogate
  std::vector<double> policy_prob;     // pi_k(a|s), FullTheorem term (b)
  double penalty_divisor = 1.0;        // tau for the DisCor exponent
};

/// Raw strategy scores normalized to batch mean 1. Missing required inputs
/// raise ConfigError; an all-zero batch degrades to uniform weights.
std::vector<double> compute_weights(const WeightingStrategy& strategy, const WeightContext& ctx);

/// Divides by the batch mean; all-zero input becomes all ones. Negative
/// entries are a contract violation.
std::vector<double> normalize_batch(std::vector<double> raw);

/// Entropy (nats) of the normalized weight distribution of one batch.
double weight_entropy(std::span<const double> weights);

}  // namespace remer
