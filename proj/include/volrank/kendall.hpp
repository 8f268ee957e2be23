#pragma once

#include <cstdint>
#include <optional>
#include <span>

namespace volrank {

/// Pair counts behind Kendall's tau-b.
struct TauCounts {
  std::int64_t score = 0;           // concordant - discordant
  std::int64_t untied_x = 0;        // pairs not tied in x
  std::int64_t untied_y = 0;        // pairs not tied in y
};

/// O(n log n) pair counting (Knight's merge-sort algorithm).
TauCounts kendall_counts(std::span<const double> x, std::span<const double> y);

/// score / sqrt(untied_x * untied_y); nullopt when either side is all tied.
std::optional<double> tau_b_from_counts(const TauCounts& c);

/// Kendall's tau-b with tie correction. nullopt when undefined (fewer than
/// two points or a constant argument). Throws std::invalid_argument on
/// length mismatch or NaN input.
std::optional<double> kendall_tau_b(std::span<const double> x, std::span<const double> y);

}  // namespace volrank
