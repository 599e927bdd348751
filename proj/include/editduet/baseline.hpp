// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string_view>

#include "editduet/collection.hpp"
#include "editduet/embedding.hpp"
#include "editduet/timeline.hpp"

namespace editduet {

inline constexpr double kBaselineCoverage = 0.9;

/// Retrieval-only timeline: whole segments in descending similarity to the
/// request (ties by file, then start), cycling through the ranking, until
/// the total reaches kBaselineCoverage * target_duration. Throws
/// EmptyCollection, or BadDuration for a non-positive target.
Timeline baseline_t2v(const VideoCollection& collection, std::string_view request, double target_duration,
                      const TextEmbedder& embedder);

}  // namespace editduet
