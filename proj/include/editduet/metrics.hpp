// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "editduet/episode.hpp"
#include "editduet/timeline.hpp"

namespace editduet {

inline constexpr double kRepetitionOverlap = 0.8;

/// min(d, d_hat) / max(d, d_hat); 0 when d_hat is 0. Throws BadDuration
/// unless d > 0 and d_hat >= 0.
double time_coverage(double d, double d_hat);

/// Two clips repeat when they share a source file and their intersection is
/// at least kRepetitionOverlap of the shorter clip. Repeating clips are
/// grouped transitively; a group of n clips counts n - 1.
std::size_t count_repetitions(const Timeline& timeline);

struct MetricsReport {
  double failure_rate = 0.0;
  /// Absent when no episode succeeded.
  std::optional<double> mean_time_coverage;
  std::optional<double> mean_repetitions;
  std::size_t n_episodes = 0;
  std::size_t n_failed = 0;
};

/// Failure rate over all episodes; coverage and repetitions over successful
/// ones. targets[i] is the requested duration of results[i]. Throws
/// LengthMismatch, EmptyInput or BadDuration.
MetricsReport aggregate(std::span<const EpisodeResult> results, std::span<const double> targets);

nlohmann::json to_json(const MetricsReport& report);
std::string render_report(const MetricsReport& report);

}  // namespace editduet
