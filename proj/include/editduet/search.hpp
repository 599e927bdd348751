// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "editduet/collection.hpp"
#include "editduet/embedding.hpp"

namespace editduet {

inline constexpr std::size_t kSearchLimit = 5;
inline constexpr double kDedupScoreRatio = 0.9;

struct SearchResult {
  std::size_t segment = 0;  // index into VideoCollection::segments
  double score = 0.0;

  bool operator==(const SearchResult&) const = default;
};

/// Cosine similarity of `query` against every segment, in collection order.
std::vector<SearchResult> score_segments(const VideoCollection& collection, const Embedding& query);

/// Drops the shorter member of every overlapping same-file pair whose longer
/// member scores at least kDedupScoreRatio times the shorter one's score.
/// All pairs are judged against the full input set, so the result does not
/// depend on input order. Equal-length pairs treat the earlier start as
/// longer. The inequality is applied literally, negative scores included.
std::vector<SearchResult> dedup_overlapping(std::span<const SearchResult> candidates,
                                            const VideoCollection& collection);

/// Score, dedup, then keep the best kSearchLimit by score (ties by file, start).
std::vector<SearchResult> search_collection(const VideoCollection& collection,
                                            std::string_view query, const TextEmbedder& embedder);

/// Sort order used for the top-k cut.
void sort_by_rank(std::vector<SearchResult>& results, const VideoCollection& collection);

/// One line per result, embeddings elided, at most kSearchLimit lines.
std::string render_search_results(const VideoCollection& collection,
                                  std::span<const SearchResult> results);

}  // namespace editduet
