// SPDX-License-Identifier: Apache-2.0
#include "editduet/timeline.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <utility>

#include "text_util.hpp"

namespace editduet {

std::string_view to_string(TimelineErrorKind kind) {
  switch (kind) {
    case TimelineErrorKind::UnknownFile: return "UnknownFile";
    case TimelineErrorKind::OutOfBounds: return "OutOfBounds";
    case TimelineErrorKind::InvertedRange: return "InvertedRange";
    case TimelineErrorKind::BadIndex: return "BadIndex";
  }
  return "?";
}

namespace {

void check_index(std::int64_t k, std::size_t limit, const char* what) {
  if (k < 0 || static_cast<std::uint64_t>(k) >= limit) {
    throw TimelineError(TimelineErrorKind::BadIndex,
                        std::string(what) + " index " + std::to_string(k) + " is out of range [0, " +
                            std::to_string(limit) + ")");
  }
}

TimelineClip clip_from_segment(const VideoSegment& seg, double start, double end) {
  return {seg.source_file, start, end, seg.description, seg.shot_type, seg.camera_motion};
}

}  // namespace

Timeline add_to_timeline(const Timeline& timeline, std::string_view source, std::int64_t k,
                         double t_s, double t_e, const VideoCollection& collection) {
  const LookupResult lookup = segment_lookup(collection, source, t_s, t_e);
  if (const auto* rejection = std::get_if<LookupRejection>(&lookup)) {
    const std::string span = std::string(source) + " [" + detail::fixed(t_s, 2) + ", " +
                             detail::fixed(t_e, 2) + "]";
    switch (*rejection) {
      case LookupRejection::UnknownFile:
        throw TimelineError(TimelineErrorKind::UnknownFile,
                            "file \"" + std::string(source) + "\" does not exist in the collection");
      case LookupRejection::InvertedRange:
        throw TimelineError(TimelineErrorKind::InvertedRange,
                            "sub-clip " + span + " has start time not before end time");
      case LookupRejection::OutOfBounds:
        throw TimelineError(TimelineErrorKind::OutOfBounds,
                            "sub-clip " + span + " exceeds the source duration of " +
                                detail::fixed(*collection.source_duration(source), 2) + "s");
    }
  }
  if (k < 0 || static_cast<std::uint64_t>(k) > timeline.size()) {
    throw TimelineError(TimelineErrorKind::BadIndex,
                        "insert index " + std::to_string(k) + " is out of range [0, " +
                            std::to_string(timeline.size()) + "]");
  }

  const VideoSegment* best = nullptr;
  double best_overlap = 0.0;
  for (const auto& seg : collection.segments) {
    if (seg.source_file != source) continue;
    const double overlap = std::min(seg.end_s(), t_e) - std::max(seg.start_s, t_s);
    if (overlap > best_overlap || (best && overlap == best_overlap && seg.duration_s < best->duration_s)) {
      best_overlap = overlap;
      best = &seg;
    }
  }
  TimelineClip clip = best ? clip_from_segment(*best, t_s, t_e)
                           : TimelineClip{std::string(source), t_s, t_e,
                                          std::string(kUntrimmedDescription), std::nullopt,
                                          std::nullopt};
  Timeline out = timeline;
  out.clips.insert(out.clips.begin() + k, std::move(clip));
  ++out.revision;
  return out;
}

Timeline remove_from_timeline(const Timeline& timeline, std::int64_t k) {
  check_index(k, timeline.size(), "remove");
  Timeline out = timeline;
  out.clips.erase(out.clips.begin() + k);
  ++out.revision;
  return out;
}

Timeline switch_clip_positions(const Timeline& timeline, std::int64_t k, std::int64_t l) {
  check_index(k, timeline.size(), "switch");
  check_index(l, timeline.size(), "switch");
  Timeline out = timeline;
  std::swap(out.clips[static_cast<std::size_t>(k)], out.clips[static_cast<std::size_t>(l)]);
  ++out.revision;
  return out;
}

Timeline move_clip(const Timeline& timeline, std::int64_t k, std::int64_t l) {
  check_index(k, timeline.size(), "move source");
  check_index(l, timeline.size(), "move target");
  Timeline out = timeline;
  TimelineClip clip = std::move(out.clips[static_cast<std::size_t>(k)]);
  out.clips.erase(out.clips.begin() + k);
  out.clips.insert(out.clips.begin() + l, std::move(clip));
  ++out.revision;
  return out;
}

double total_duration(const Timeline& timeline) {
  return std::accumulate(timeline.clips.begin(), timeline.clips.end(), 0.0,
                         [](double acc, const TimelineClip& c) { return acc + c.duration(); });
}

std::string render_view(const Timeline& timeline, Audience audience) {
  if (timeline.empty()) return "(timeline is empty)";
  std::ostringstream out;
  for (std::size_t i = 0; i < timeline.size(); ++i) {
    const auto& c = timeline.clips[i];
    out << '[' << i << "] {\"file\": " << detail::quoted(c.source_file);
    if (audience == Audience::Editor) {
      out << ", \"start\": " << detail::fixed(c.start_s, 2) << ", \"end\": " << detail::fixed(c.end_s, 2);
    }
    out << ", \"duration\": " << detail::fixed(c.duration(), 1)
        << ", \"description\": " << detail::quoted(c.description);
    if (audience == Audience::Editor) {
      out << ", \"shot_type\": " << detail::quoted(c.shot_type ? to_string(*c.shot_type) : "unknown")
          << ", \"camera_motion\": "
          << detail::quoted(c.camera_motion ? to_string(*c.camera_motion) : "unknown");
    }
    out << "}\n";
  }
  out << "Total duration: " << detail::fixed(total_duration(timeline), 1) << "s";
  return out.str();
}

namespace {

// Unbiased draw from [0, bound) using rejection on raw 64-bit output.
std::size_t bounded(std::mt19937_64& rng, std::size_t bound) {
  const std::uint64_t b = bound;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % b;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return static_cast<std::size_t>(x % b);
}

}  // namespace

Timeline init_random(const VideoCollection& collection, std::size_t n, std::uint64_t seed) {
  if (collection.segments.empty()) throw EmptyCollection();
  if (n == 0) throw std::invalid_argument("init_random needs n >= 1");
  std::mt19937_64 rng(seed);
  const std::size_t count = collection.segments.size();
  std::vector<std::size_t> picks;
  if (n <= count) {
    std::vector<std::size_t> pool(count);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = i + bounded(rng, count - i);
      std::swap(pool[i], pool[j]);
      picks.push_back(pool[i]);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) picks.push_back(bounded(rng, count));
  }
  Timeline out;
  for (std::size_t idx : picks) {
    const auto& seg = collection.segments[idx];
    out.clips.push_back(clip_from_segment(seg, seg.start_s, seg.end_s()));
  }
  return out;
}

nlohmann::json to_json(const TimelineClip& c) {
  using nlohmann::json;
  return {
      {"file", c.source_file},
      {"start_s", c.start_s},
      {"end_s", c.end_s},
      {"description", c.description},
      {"shot_type", c.shot_type ? json(std::string(to_string(*c.shot_type))) : json(nullptr)},
      {"camera_motion", c.camera_motion ? json(std::string(to_string(*c.camera_motion))) : json(nullptr)},
  };
}

nlohmann::json to_json(const TimelineDocument& doc) {
  using nlohmann::json;
  json clips = json::array();
  for (const auto& c : doc.timeline.clips) clips.push_back(to_json(c));
  return {
      {"request", doc.request ? json(*doc.request) : json(nullptr)},
      {"clips", std::move(clips)},
      {"history_ref", doc.history_ref ? json(*doc.history_ref) : json(nullptr)},
  };
}

TimelineDocument parse_timeline_document(const nlohmann::json& doc) {
  TimelineDocument out;
  try {
    if (!doc.is_object()) throw SchemaError("timeline file must be a JSON object");
    if (doc.contains("request") && !doc["request"].is_null()) out.request = doc["request"].get<std::string>();
    if (doc.contains("history_ref") && !doc["history_ref"].is_null()) {
      out.history_ref = doc["history_ref"].get<std::string>();
    }
    const auto& clips = doc.at("clips");
    if (!clips.is_array()) throw SchemaError("clips must be an array");
    for (std::size_t i = 0; i < clips.size(); ++i) {
      const auto& c = clips[i];
      TimelineClip clip;
      clip.source_file = c.at("file").get<std::string>();
      clip.start_s = c.at("start_s").get<double>();
      clip.end_s = c.at("end_s").get<double>();
      clip.description = c.value("description", std::string());
      if (c.contains("shot_type") && !c["shot_type"].is_null()) {
        clip.shot_type = parse_shot_type(c["shot_type"].get<std::string>());
        if (!clip.shot_type) throw VocabularyError("clips[" + std::to_string(i) + "].shot_type is not a known shot type");
      }
      if (c.contains("camera_motion") && !c["camera_motion"].is_null()) {
        clip.camera_motion = parse_camera_motion(c["camera_motion"].get<std::string>());
        if (!clip.camera_motion) {
          throw VocabularyError("clips[" + std::to_string(i) + "].camera_motion is not a known motion");
        }
      }
      if (!(clip.start_s >= 0.0 && clip.start_s < clip.end_s)) {
        throw SchemaError("clips[" + std::to_string(i) + "] needs 0 <= start_s < end_s");
      }
      out.timeline.clips.push_back(std::move(clip));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed timeline file: ") + e.what());
  }
  return out;
}

TimelineDocument load_timeline(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path.string());
  try {
    return parse_timeline_document(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

void save_timeline(const TimelineDocument& doc, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json(doc).dump(2) << '\n';
}

}  // namespace editduet
