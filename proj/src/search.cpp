// SPDX-License-Identifier: Apache-2.0
#include "editduet/search.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>

#include "text_util.hpp"

namespace editduet {

std::vector<SearchResult> score_segments(const VideoCollection& collection, const Embedding& query) {
  const auto n = static_cast<Eigen::Index>(collection.segments.size());
  if (n == 0) return {};
  if (query.size() != collection.embedding_dim()) {
    throw DimensionError("query embedding has dimension " + std::to_string(query.size()) +
                         ", collection uses " + std::to_string(collection.embedding_dim()));
  }
  Eigen::VectorXd scores;
  const double qn = query.norm();
  if (qn == 0.0) {
    scores = Eigen::VectorXd::Zero(n);
  } else if (collection.unit_embeddings.rows() == n) {
    scores = collection.unit_embeddings * (query / qn);
  } else {
    // Collection assembled by hand without index_collection().
    scores.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      scores[i] = cosine_similarity(collection.segments[static_cast<std::size_t>(i)].embedding, query);
    }
  }
  std::vector<SearchResult> out(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = {static_cast<std::size_t>(i), scores[i]};
  return out;
}

namespace {

// Strict "longer than" order: duration, then earlier start, then lower index.
bool longer_than(const VideoSegment& a, std::size_t ia, const VideoSegment& b, std::size_t ib) {
  if (a.duration_s != b.duration_s) return a.duration_s > b.duration_s;
  if (a.start_s != b.start_s) return a.start_s < b.start_s;
  return ia < ib;
}

}  // namespace

std::vector<SearchResult> dedup_overlapping(std::span<const SearchResult> candidates,
                                            const VideoCollection& collection) {
  // Per-file sweep over start-sorted candidates; only pairs that intersect
  // are visited.
  std::map<std::string_view, std::vector<std::size_t>> by_file;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    by_file[collection.segments.at(candidates[i].segment).source_file].push_back(i);
  }
  std::vector<bool> dropped(candidates.size(), false);
  for (auto& [file, idx] : by_file) {
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      const auto& sa = collection.segments[candidates[a].segment];
      const auto& sb = collection.segments[candidates[b].segment];
      if (sa.start_s != sb.start_s) return sa.start_s < sb.start_s;
      return a < b;
    });
    for (std::size_t x = 0; x < idx.size(); ++x) {
      const auto& cx = candidates[idx[x]];
      const auto& sx = collection.segments[cx.segment];
      for (std::size_t y = x + 1; y < idx.size(); ++y) {
        const auto& cy = candidates[idx[y]];
        const auto& sy = collection.segments[cy.segment];
        if (sy.start_s >= sx.end_s()) break;
        const bool x_longer = longer_than(sx, cx.segment, sy, cy.segment);
        const SearchResult& longer = x_longer ? cx : cy;
        const std::size_t shorter = x_longer ? idx[y] : idx[x];
        if (longer.score >= kDedupScoreRatio * candidates[shorter].score) dropped[shorter] = true;
      }
    }
  }
  std::vector<SearchResult> out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!dropped[i]) out.push_back(candidates[i]);
  }
  return out;
}

void sort_by_rank(std::vector<SearchResult>& results, const VideoCollection& collection) {
  std::sort(results.begin(), results.end(), [&](const SearchResult& a, const SearchResult& b) {
    if (a.score != b.score) return a.score > b.score;
    const auto& sa = collection.segments[a.segment];
    const auto& sb = collection.segments[b.segment];
    if (sa.source_file != sb.source_file) return sa.source_file < sb.source_file;
    if (sa.start_s != sb.start_s) return sa.start_s < sb.start_s;
    return a.segment < b.segment;
  });
}

std::vector<SearchResult> search_collection(const VideoCollection& collection, std::string_view query,
                                            const TextEmbedder& embedder) {
  if (query.empty()) throw std::invalid_argument("search query must be non-empty");
  if (collection.segments.empty()) return {};
  const auto scored = score_segments(collection, embedder.embed(query));
  auto kept = dedup_overlapping(scored, collection);
  sort_by_rank(kept, collection);
  if (kept.size() > kSearchLimit) kept.resize(kSearchLimit);
  return kept;
}

std::string render_search_results(const VideoCollection& collection,
                                  std::span<const SearchResult> results) {
  if (results.empty()) return "(no search results)";
  std::ostringstream out;
  const std::size_t n = std::min(results.size(), kSearchLimit);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = collection.segments.at(results[i].segment);
    out << '[' << i << "] {\"file\": " << detail::quoted(s.source_file)
        << ", \"start\": " << detail::fixed(s.start_s, 2)
        << ", \"end\": " << detail::fixed(s.end_s(), 2)
        << ", \"duration\": " << detail::fixed(s.duration_s, 1)
        << ", \"score\": " << detail::fixed(results[i].score, 3)
        << ", \"description\": " << detail::quoted(s.description)
        << ", \"shot_type\": " << detail::quoted(s.shot_type ? to_string(*s.shot_type) : "unknown")
        << ", \"camera_motion\": "
        << detail::quoted(s.camera_motion ? to_string(*s.camera_motion) : "unknown") << "}";
    if (i + 1 < n) out << '\n';
  }
  return out.str();
}

}  // namespace editduet
