// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "editduet/embedding.hpp"
#include "editduet/errors.hpp"
#include "editduet/vocabulary.hpp"

namespace editduet {

class ChatGateway;

inline constexpr double kMinSegmentDuration = 1.0;
inline constexpr double kUniformSegmentStep = 4.0;
inline constexpr Eigen::Index kFallbackEmbeddingDim = 64;

/// One searchable sub-clip of a source video.
///
/// Shot type and camera motion are absent only for segments produced by the
/// uniform fallback segmentation, which has no classifier output.
struct VideoSegment {
  std::string source_file;
  double start_s = 0.0;
  double duration_s = 0.0;
  std::string description;
  std::optional<ShotType> shot_type;
  std::optional<CameraMotion> camera_motion;
  Embedding embedding;
  int level = 0;
  std::optional<std::string> keyframe_ref;

  double end_s() const { return start_s + duration_s; }
};

struct VideoCollection {
  std::string name;
  std::vector<VideoSegment> segments;
  std::map<std::string, double> source_durations;
  std::string summary;
  /// Segments dropped at ingest for being shorter than kMinSegmentDuration.
  std::size_t dropped_short_segments = 0;
  /// Row i is segments[i].embedding scaled to unit length.
  Eigen::MatrixXd unit_embeddings;

  std::optional<double> source_duration(std::string_view file) const;
  Eigen::Index embedding_dim() const;
};

struct ArollTranscript {
  std::string text;
  double duration_s = 0.0;
};

/// Parses and validates collection metadata. Throws SchemaError,
/// VocabularyError or DimensionError; error messages name the offending
/// JSON path (e.g. "segments[3].shot_type").
VideoCollection parse_collection(const nlohmann::json& doc);
VideoCollection load_collection(const std::filesystem::path& metadata_file);

/// Recomputes unit_embeddings and checks the dimension invariant.
void index_collection(VideoCollection& collection);

nlohmann::json to_json(const VideoCollection& collection);
void save_collection(const VideoCollection& collection, const std::filesystem::path& path);

ArollTranscript parse_aroll(const nlohmann::json& doc);
ArollTranscript load_aroll(const std::filesystem::path& path);

/// (start, duration) pairs tiling [0, source_duration) with `step`-second
/// windows. A trailing remainder shorter than one second is discarded.
std::vector<std::pair<double, double>> uniform_segments(double source_duration,
                                                        double step = kUniformSegmentStep);

/// Asks the gateway for a one-paragraph summary of the level-0 segment
/// descriptions, stores it in collection.summary and returns it.
std::string summarize_collection(VideoCollection& collection, ChatGateway& gateway);

enum class LookupRejection { UnknownFile, InvertedRange, OutOfBounds };

std::string_view to_string(LookupRejection rejection);

struct SourceSpan {
  std::string source_file;
  double start_s = 0.0;
  double end_s = 0.0;
  double source_duration = 0.0;
};

using LookupResult = std::variant<SourceSpan, LookupRejection>;

/// Succeeds iff the file exists and 0 <= start_s < end_s <= source duration.
LookupResult segment_lookup(const VideoCollection& collection, std::string_view source_file,
                            double start_s, double end_s);

}  // namespace editduet
