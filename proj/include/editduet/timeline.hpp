// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "editduet/collection.hpp"
#include "editduet/vocabulary.hpp"

namespace editduet {

inline constexpr std::string_view kUntrimmedDescription = "(untrimmed source)";

struct TimelineClip {
  std::string source_file;
  double start_s = 0.0;
  double end_s = 0.0;
  std::string description;
  std::optional<ShotType> shot_type;
  std::optional<CameraMotion> camera_motion;

  double duration() const { return end_s - start_s; }
  bool operator==(const TimelineClip&) const = default;
};

/// Single B-roll track of abutting clips. Indices are 0-based.
struct Timeline {
  std::vector<TimelineClip> clips;
  /// Incremented by exactly one on every successful mutation.
  std::uint64_t revision = 0;

  std::size_t size() const { return clips.size(); }
  bool empty() const { return clips.empty(); }
};

enum class TimelineErrorKind { UnknownFile, OutOfBounds, InvertedRange, BadIndex };

std::string_view to_string(TimelineErrorKind kind);

class TimelineError : public std::runtime_error {
 public:
  TimelineError(TimelineErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  TimelineErrorKind kind() const { return kind_; }

 private:
  TimelineErrorKind kind_;
};

// Mutations never modify their input; on error they throw TimelineError and
// the caller's timeline is untouched.

/// Inserts source[t_s, t_e] at index k (0 <= k <= size). Description, shot
/// type and motion come from the segment of `source` with the largest
/// temporal overlap (the shortest such segment on ties), or
/// kUntrimmedDescription when nothing overlaps.
Timeline add_to_timeline(const Timeline& timeline, std::string_view source, std::int64_t k,
                         double t_s, double t_e, const VideoCollection& collection);
Timeline remove_from_timeline(const Timeline& timeline, std::int64_t k);
Timeline switch_clip_positions(const Timeline& timeline, std::int64_t k, std::int64_t l);
/// Removes clip k and reinserts it so that it ends up at index l.
Timeline move_clip(const Timeline& timeline, std::int64_t k, std::int64_t l);

double total_duration(const Timeline& timeline);

enum class Audience { Editor, Critic };

/// Deterministic text listing, one "[i] {...}" record per clip followed by a
/// total-duration line. Durations use one decimal place.
std::string render_view(const Timeline& timeline, Audience audience);

/// n clips cut from whole segments drawn uniformly, without replacement when
/// n <= segment count. Uses only raw mt19937_64 output so the draw is the
/// same on every platform.
Timeline init_random(const VideoCollection& collection, std::size_t n, std::uint64_t seed);

/// Timeline file: {"request", "clips", "history_ref"}.
struct TimelineDocument {
  std::optional<std::string> request;
  Timeline timeline;
  std::optional<std::string> history_ref;
};

nlohmann::json to_json(const TimelineClip& clip);
nlohmann::json to_json(const TimelineDocument& doc);
TimelineDocument parse_timeline_document(const nlohmann::json& doc);
TimelineDocument load_timeline(const std::filesystem::path& path);
void save_timeline(const TimelineDocument& doc, const std::filesystem::path& path);

}  // namespace editduet
