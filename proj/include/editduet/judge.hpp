// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "editduet/agreement.hpp"
#include "editduet/collection.hpp"
#include "editduet/gateway.hpp"
#include "editduet/timeline.hpp"

namespace editduet {

inline constexpr std::size_t kGridColumns = 5;
inline constexpr int kCellWidth = 256;
inline constexpr int kCellHeight = 144;
inline constexpr int kCaptionHeight = 24;

class MissingKeyframe : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnparseableVerdict : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct KeyframeGrid {
  std::string png;  // encoded image bytes
  std::size_t rows = 0;
  std::size_t cols = 0;
  /// "#i — X.Xs" per clip, 1-based, in playback order.
  std::vector<std::string> captions;
  double total_duration_s = 0.0;
};

/// Grid rows for n clips at kGridColumns per row.
std::size_t grid_rows(std::size_t n_clips);

/// Midpoint keyframe of every clip laid out row-major. A clip uses the
/// keyframe_ref of the collection segment covering its midpoint (relative
/// refs resolve against media_root); failing that the frame is extracted
/// from media_root/source_file with ffmpeg when both are available.
KeyframeGrid build_keyframe_grid(const Timeline& timeline, const VideoCollection& collection,
                                 const std::filesystem::path& media_root);

/// Slot letter from the reply: the last "Verdict: X" line, or a bare "A"/"B".
std::optional<Choice> parse_verdict(std::string_view reply);

/// True when tau1 is shown in slot B for this pair.
bool swap_slots(std::string_view pair_id, std::uint64_t seed);

struct JudgeVerdict {
  std::string pair_id;
  /// A = tau1, B = tau2, independent of presentation order.
  Choice preferred = Choice::A;
  std::string rationale;
  bool swapped = false;
};

/// Verdict-log record {pair_id, slot_assignment, reply, preferred}.
nlohmann::json to_json(const JudgeVerdict& verdict);

/// Shows both grids in seeded slot order, parses the verdict (one retry) and
/// maps it back to tau1/tau2. Throws UnparseableVerdict.
JudgeVerdict judge(std::string_view pair_id, std::string_view request, const KeyframeGrid& tau1,
                   const KeyframeGrid& tau2, ChatGateway& gateway, std::uint64_t seed);

struct PreferenceRate {
  double rate = 0.0;
  std::size_t n = 0;
  /// Both sides come from the same method.
  bool degenerate = false;
};

/// Fraction of verdicts preferring tau1 (method m1). Throws EmptyInput.
PreferenceRate preference_rate(std::span<const JudgeVerdict> verdicts, std::string_view m1, std::string_view m2);

}  // namespace editduet
