#include "remer/weighting.hpp"

#include <cmath>

namespace remer {

const char* to_string(StrategyKind k) {
  switch (k) {
    case StrategyKind::kUniform: return "uniform";
    case StrategyKind::kPer: return "per";
    case StrategyKind::kDisCor: return "discor";
    case StrategyKind::kReMern: return "remern";
    case StrategyKind::kReMert: return "remert";
    case StrategyKind::kOracle: return "oracle";
    case StrategyKind::kFullTheorem: return "full_theorem";
  }
  return "?";
}

const char* to_string(RatioSource r) {
  switch (r) {
    case RatioSource::kAuto: return "auto";
    case RatioSource::kUnit: return "unit";
    case RatioSource::kExact: return "exact";
    case RatioSource::kLfiw: return "lfiw";
  }
  return "?";
}

std::optional<StrategyKind> parse_strategy_kind(std::string_view name) {
  for (StrategyKind k :
       {StrategyKind::kUniform, StrategyKind::kPer, StrategyKind::kDisCor, StrategyKind::kReMern,
        StrategyKind::kReMert, StrategyKind::kOracle, StrategyKind::kFullTheorem})
    if (name == to_string(k)) return k;
  return std::nullopt;
}

std::optional<RatioSource> parse_ratio_source(std::string_view name) {
  for (RatioSource r :
       {RatioSource::kAuto, RatioSource::kUnit, RatioSource::kExact, RatioSource::kLfiw})
    if (name == to_string(r)) return r;
  return std::nullopt;
}

std::string strategy_names() {
  std::string out;
  for (StrategyKind k :
       {StrategyKind::kUniform, StrategyKind::kPer, StrategyKind::kDisCor, StrategyKind::kReMern,
        StrategyKind::kReMert, StrategyKind::kOracle, StrategyKind::kFullTheorem}) {
    if (!out.empty()) out += ", ";
    out += to_string(k);
  }
  return out;
}

namespace {

const std::vector<double>& require(const std::vector<double>& v, int batch, const char* what) {
  if (static_cast<int>(v.size()) != batch)
    throw ConfigError(std::string("compute_weights: strategy requires '") + what +
                      "' for every sample in the batch");
  return v;
}

double ratio_at(const WeightContext& ctx, int i) {
  return ctx.ratio.empty() ? 1.0 : ctx.ratio[i];
}

}  // namespace

std::vector<double> compute_weights(const WeightingStrategy& strategy, const WeightContext& ctx) {
  const int n = ctx.batch;
  if (n <= 0) throw ConfigError("compute_weights: empty batch");
  if (!ctx.ratio.empty()) require(ctx.ratio, n, "ratio");

  std::vector<double> raw(n, 1.0);
  switch (strategy.kind) {
    case StrategyKind::kUniform:
      break;
    case StrategyKind::kPer: {
      const auto& td = require(ctx.td_error_abs, n, "td_error_abs");
      for (int i = 0; i < n; ++i)
        raw[i] = std::pow(std::abs(td[i]), strategy.per_exponent) + strategy.priority_floor;
      break;
    }
    case StrategyKind::kDisCor: {
      const auto& pen = require(ctx.discor_penalty, n, "discor_penalty");
      const double tau = std::max(ctx.penalty_divisor, 1e-12);
      for (int i = 0; i < n; ++i) raw[i] = std::exp(-pen[i] / tau);
      break;
    }
    case StrategyKind::kReMern: {
      const auto& pen = require(ctx.discor_penalty, n, "discor_penalty");
      const double tau = std::max(ctx.penalty_divisor, 1e-12);
      for (int i = 0; i < n; ++i) raw[i] = ratio_at(ctx, i) * std::exp(-pen[i] / tau);
      break;
    }
    case StrategyKind::kReMert: {
      const auto& tce = require(ctx.expected_tce, n, "expected_tce");
      for (int i = 0; i < n; ++i) raw[i] = ratio_at(ctx, i) * std::exp(-tce[i]);
      break;
    }
    case StrategyKind::kOracle: {
      const auto& gap = require(ctx.q_gap, n, "q_gap");
      for (int i = 0; i < n; ++i) raw[i] = ratio_at(ctx, i) * std::exp(-gap[i]);
      break;
    }
    case StrategyKind::kFullTheorem: {
      const auto& gap = require(ctx.q_gap, n, "q_gap");
      const auto& td = require(ctx.td_error_abs, n, "td_error_abs");
      for (int i = 0; i < n; ++i) {
        double b = 2.0;
        if (!strategy.drop_policy_term) {
          const auto& pp = require(ctx.policy_prob, n, "policy_prob");
          b = 2.0 - pp[i];
        }
        raw[i] = ratio_at(ctx, i) * b * std::exp(-gap[i]) * std::abs(td[i]);
      }
      break;
    }
  }
  return normalize_batch(std::move(raw));
}

std::vector<double> normalize_batch(std::vector<double> raw) {
  if (raw.empty()) throw ConfigError("normalize_batch: empty batch");
  double sum = 0.0;
  for (double v : raw) {
    if (v < 0.0) throw ContractViolation("normalize_batch: negative raw weight");
    if (!std::isfinite(v)) throw ContractViolation("normalize_batch: non-finite raw weight");
    sum += v;
  }
  if (sum <= 0.0) {
    for (double& v : raw) v = 1.0;
    return raw;
  }
  const double mean = sum / static_cast<double>(raw.size());
  for (double& v : raw) v /= mean;
  return raw;
}

double weight_entropy(std::span<const double> weights) {
  double sum = 0.0;
  for (double w : weights) sum += w;
  if (sum <= 0.0) return 0.0;
  double h = 0.0;
  for (double w : weights) {
    if (w <= 0.0) continue;
    const double p = w / sum;
    h -= p * std::log(p);
  }
  return h;
}

}  // namespace remer
