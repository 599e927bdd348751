// SPDX-License-Identifier: Apache-2.0
#include "editduet/collection.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "editduet/gateway.hpp"
#include "text_util.hpp"

namespace editduet {
namespace {

constexpr double kBoundsSlack = 1e-6;

using nlohmann::json;

const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw SchemaError("missing field " + path + "." + key);
  }
  return obj.at(key);
}

std::string require_string(const json& obj, const char* key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_string()) throw SchemaError(path + "." + key + " must be a string");
  return v.get<std::string>();
}

double require_number(const json& obj, const char* key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_number()) throw SchemaError(path + "." + key + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw SchemaError(path + "." + key + " must be finite");
  return d;
}

std::optional<std::string> optional_string(const json& obj, const char* key,
                                           const std::string& path) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  if (!obj.at(key).is_string()) throw SchemaError(path + "." + key + " must be a string or null");
  return obj.at(key).get<std::string>();
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

VideoSegment parse_segment(const json& item, const std::string& path) {
  if (!item.is_object()) throw SchemaError(path + " must be an object");
  VideoSegment seg;
  seg.source_file = require_string(item, "file", path);
  seg.start_s = require_number(item, "start_s", path);
  seg.duration_s = require_number(item, "duration_s", path);
  seg.description = require_string(item, "description", path);
  const json& level = require(item, "level", path);
  if (!level.is_number_integer() || level.get<long long>() < 0) {
    throw SchemaError(path + ".level must be a non-negative integer");
  }
  seg.level = level.get<int>();

  const std::string shot = require_string(item, "shot_type", path);
  seg.shot_type = parse_shot_type(shot);
  if (!seg.shot_type) throw VocabularyError(path + ".shot_type: unknown shot type \"" + shot + "\"");
  const std::string motion = require_string(item, "camera_motion", path);
  seg.camera_motion = parse_camera_motion(motion);
  if (!seg.camera_motion) {
    throw VocabularyError(path + ".camera_motion: unknown camera motion \"" + motion + "\"");
  }

  const json& emb = require(item, "embedding", path);
  if (!emb.is_array()) throw SchemaError(path + ".embedding must be an array");
  seg.embedding.resize(static_cast<Eigen::Index>(emb.size()));
  for (std::size_t i = 0; i < emb.size(); ++i) {
    if (!emb[i].is_number()) throw SchemaError(path + ".embedding[" + std::to_string(i) + "] must be a number");
    seg.embedding[static_cast<Eigen::Index>(i)] = emb[i].get<double>();
  }
  seg.keyframe_ref = optional_string(item, "keyframe", path);
  if (seg.start_s < 0.0) throw SchemaError(path + ".start_s must be >= 0");
  return seg;
}

}  // namespace

std::optional<double> VideoCollection::source_duration(std::string_view file) const {
  const auto it = source_durations.find(std::string(file));
  if (it == source_durations.end()) return std::nullopt;
  return it->second;
}

Eigen::Index VideoCollection::embedding_dim() const {
  return segments.empty() ? 0 : segments.front().embedding.size();
}

void index_collection(VideoCollection& collection) {
  const Eigen::Index dim = collection.embedding_dim();
  Eigen::MatrixXd raw(static_cast<Eigen::Index>(collection.segments.size()), dim);
  for (std::size_t i = 0; i < collection.segments.size(); ++i) {
    const auto& e = collection.segments[i].embedding;
    if (e.size() != dim) {
      throw DimensionError("segments[" + std::to_string(i) + "].embedding has dimension " +
                           std::to_string(e.size()) + ", expected " + std::to_string(dim));
    }
    raw.row(static_cast<Eigen::Index>(i)) = e.transpose();
  }
  collection.unit_embeddings = normalized_rows(raw);
}

std::vector<std::pair<double, double>> uniform_segments(double source_duration, double step) {
  if (step <= 0.0) throw std::invalid_argument("segment step must be positive");
  std::vector<std::pair<double, double>> out;
  for (double start = 0.0; start < source_duration; start += step) {
    const double len = std::min(step, source_duration - start);
    if (len >= kMinSegmentDuration) out.emplace_back(start, len);
  }
  return out;
}

VideoCollection parse_collection(const json& doc) {
  if (!doc.is_object()) throw SchemaError("collection metadata must be a JSON object");
  VideoCollection c;
  c.name = require_string(doc, "name", "$");
  if (auto s = optional_string(doc, "summary", "$")) c.summary = *s;

  const json& sources = require(doc, "sources", "$");
  if (!sources.is_array()) throw SchemaError("$.sources must be an array");
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const std::string path = "sources[" + std::to_string(i) + "]";
    const std::string file = require_string(sources[i], "file", path);
    const double duration = require_number(sources[i], "duration_s", path);
    if (duration <= 0.0) throw SchemaError(path + ".duration_s must be > 0");
    if (!c.source_durations.emplace(file, duration).second) {
      throw SchemaError(path + ".file duplicates \"" + file + "\"");
    }
  }

  if (!doc.contains("segments") || doc["segments"].is_null()) {
    // No hierarchy supplied: uniform level-0 windows, unlabeled.
    const HashProjectionEmbedder embedder(kFallbackEmbeddingDim);
    for (const auto& [file, duration] : c.source_durations) {
      for (const auto& [start, len] : uniform_segments(duration)) {
        VideoSegment seg;
        seg.source_file = file;
        seg.start_s = start;
        seg.duration_s = len;
        seg.description = file + " from " + detail::fixed(start, 1) + "s to " +
                          detail::fixed(start + len, 1) + "s";
        seg.embedding = embedder.embed(seg.description);
        c.segments.push_back(std::move(seg));
      }
    }
  } else {
    const json& segments = doc["segments"];
    if (!segments.is_array()) throw SchemaError("$.segments must be an array or null");
    for (std::size_t i = 0; i < segments.size(); ++i) {
      const std::string path = "segments[" + std::to_string(i) + "]";
      VideoSegment seg = parse_segment(segments[i], path);
      const auto duration = c.source_duration(seg.source_file);
      if (!duration) throw SchemaError(path + ".file \"" + seg.source_file + "\" is not listed in sources");
      if (seg.duration_s < kMinSegmentDuration) {
        ++c.dropped_short_segments;
        continue;
      }
      if (seg.end_s() > *duration + kBoundsSlack) {
        throw SchemaError(path + " ends at " + detail::fixed(seg.end_s(), 3) +
                          "s, past the source duration " + detail::fixed(*duration, 3) + "s");
      }
      c.segments.push_back(std::move(seg));
    }
  }
  index_collection(c);
  return c;
}

VideoCollection load_collection(const std::filesystem::path& metadata_file) {
  return parse_collection(read_json_file(metadata_file));
}

json to_json(const VideoCollection& c) {
  json sources = json::array();
  for (const auto& [file, duration] : c.source_durations) {
    sources.push_back({{"file", file}, {"duration_s", duration}});
  }
  json segments = json::array();
  for (const auto& s : c.segments) {
    json emb = json::array();
    for (Eigen::Index i = 0; i < s.embedding.size(); ++i) emb.push_back(s.embedding[i]);
    segments.push_back({
        {"file", s.source_file},
        {"start_s", s.start_s},
        {"duration_s", s.duration_s},
        {"level", s.level},
        {"description", s.description},
        {"shot_type", s.shot_type ? json(std::string(to_string(*s.shot_type))) : json(nullptr)},
        {"camera_motion",
         s.camera_motion ? json(std::string(to_string(*s.camera_motion))) : json(nullptr)},
        {"embedding", std::move(emb)},
        {"keyframe", s.keyframe_ref ? json(*s.keyframe_ref) : json(nullptr)},
    });
  }
  return {
      {"name", c.name},
      {"summary", c.summary.empty() ? json(nullptr) : json(c.summary)},
      {"sources", std::move(sources)},
      {"segments", std::move(segments)},
  };
}

void save_collection(const VideoCollection& collection, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json(collection).dump(2) << '\n';
}

ArollTranscript parse_aroll(const json& doc) {
  ArollTranscript t;
  t.text = require_string(doc, "text", "$");
  t.duration_s = require_number(doc, "duration_s", "$");
  if (t.duration_s <= 0.0) throw SchemaError("$.duration_s must be > 0");
  return t;
}

ArollTranscript load_aroll(const std::filesystem::path& path) {
  return parse_aroll(read_json_file(path));
}

std::string summarize_collection(VideoCollection& collection, ChatGateway& gateway) {
  std::ostringstream listing;
  std::size_t count = 0;
  for (const auto& seg : collection.segments) {
    if (seg.level != 0) continue;
    listing << "- " << seg.description << '\n';
    ++count;
  }
  if (count == 0) throw EmptyCollection("collection has no top-level segments to summarize");

  CompletionRequest request;
  request.temperature = 0.0;
  request.messages = {
      {"system",
       "You summarize video collections for a video editor. Given descriptions of the top-level "
       "segments of every video in a collection, write one paragraph describing what the "
       "collection contains. Reply with the paragraph only.",
       {}},
      {"user", "Segment descriptions:\n" + listing.str(), {}},
  };
  collection.summary = detail::trim(gateway.complete(request));
  return collection.summary;
}

std::string_view to_string(LookupRejection rejection) {
  switch (rejection) {
    case LookupRejection::UnknownFile: return "UnknownFile";
    case LookupRejection::InvertedRange: return "InvertedRange";
    case LookupRejection::OutOfBounds: return "OutOfBounds";
  }
  return "?";
}

LookupResult segment_lookup(const VideoCollection& collection, std::string_view source_file,
                            double start_s, double end_s) {
  const auto duration = collection.source_duration(source_file);
  if (!duration) return LookupRejection::UnknownFile;
  if (!(start_s < end_s)) return LookupRejection::InvertedRange;
  if (start_s < 0.0 || end_s > *duration) return LookupRejection::OutOfBounds;
  return SourceSpan{std::string(source_file), start_s, end_s, *duration};
}

}  // namespace editduet
