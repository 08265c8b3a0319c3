#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace remer {

/// One metrics CSV row. wall_ms stays empty unless timing was requested, so
/// default runs are byte-reproducible.
struct MetricsRow {
  std::string config_id;
  uint64_t seed = 0;
  long long iteration = 0;
  std::string strategy;
  double td_error_l1 = 0.0;
  double q_gap_linf = 0.0;
  double greedy_return = 0.0;
  double regret = 0.0;
  double mean_weight_entropy = 0.0;
  std::optional<double> wall_ms;
};

inline constexpr const char* kMetricsHeader =
    "config_id,seed,iteration,strategy,td_error_l1,q_gap_linf,greedy_return,regret,"
    "mean_weight_entropy,wall_ms";

/// Shortest round-trip decimal form (std::to_chars), locale-independent.
std::string format_double(double v);

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows);

uint64_t fnv1a64(std::string_view data);
std::string to_hex(uint64_t v);
uint64_t hash_file(const std::filesystem::path& path);

/// Spearman rank correlation with average ranks on ties; NaN for n < 2 or a
/// constant input.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace remer
