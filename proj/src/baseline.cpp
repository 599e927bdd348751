// SPDX-License-Identifier: Apache-2.0
#include "editduet/baseline.hpp"

#include <cmath>

#include "editduet/errors.hpp"
#include "editduet/search.hpp"

namespace editduet {

Timeline baseline_t2v(const VideoCollection& collection, std::string_view request, double target_duration,
                      const TextEmbedder& embedder) {
  if (collection.segments.empty()) throw EmptyCollection();
  if (!std::isfinite(target_duration) || target_duration <= 0.0) {
    throw BadDuration("target duration must be positive");
  }
  auto ranked = score_segments(collection, embedder.embed(request));
  sort_by_rank(ranked, collection);

  Timeline timeline;
  double total = 0.0;
  for (std::size_t i = 0; total < kBaselineCoverage * target_duration; i = (i + 1) % ranked.size()) {
    const auto& s = collection.segments[ranked[i].segment];
    timeline.clips.push_back({s.source_file, s.start_s, s.end_s(), s.description, s.shot_type, s.camera_motion});
    total += s.duration_s;
  }
  timeline.revision = timeline.clips.size();
  return timeline;
}

}  // namespace editduet
