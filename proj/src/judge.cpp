// SPDX-License-Identifier: Apache-2.0
#include "editduet/judge.hpp"

#include <cstdlib>
#include <regex>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "editduet/errors.hpp"
#include "editduet/hashing.hpp"
#include "editduet/protocol.hpp"
#include "text_util.hpp"

namespace editduet {

namespace {

using nlohmann::json;

bool have_ffmpeg() { return std::system("ffmpeg -version >/dev/null 2>&1") == 0; }

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

cv::Mat load_keyframe(const TimelineClip& clip, std::size_t index, const VideoCollection& collection,
                      const std::filesystem::path& media_root) {
  const double mid = 0.5 * (clip.start_s + clip.end_s);
  for (const auto& s : collection.segments) {
    if (s.source_file != clip.source_file || !s.keyframe_ref || mid < s.start_s || mid > s.end_s()) continue;
    std::filesystem::path ref(*s.keyframe_ref);
    if (ref.is_relative()) ref = media_root / ref;
    cv::Mat img = cv::imread(ref.string(), cv::IMREAD_COLOR);
    if (!img.empty()) return img;
  }
  const auto source = media_root / clip.source_file;
  if (std::filesystem::exists(source) && have_ffmpeg()) {
    const auto tmp = std::filesystem::temp_directory_path() /
                     ("editduet_kf_" + std::to_string(fnv1a64(clip.source_file) ^ index) + ".png");
    const std::string cmd = "ffmpeg -loglevel error -y -ss " + detail::fixed(mid, 3) + " -i " +
                            shell_quote(source.string()) + " -frames:v 1 " + shell_quote(tmp.string());
    if (std::system(cmd.c_str()) == 0) {
      cv::Mat img = cv::imread(tmp.string(), cv::IMREAD_COLOR);
      std::filesystem::remove(tmp);
      if (!img.empty()) return img;
    }
  }
  throw MissingKeyframe("no keyframe for clip #" + std::to_string(index + 1) + " (" + clip.source_file + " at " +
                        detail::fixed(mid, 2) + "s)");
}

}  // namespace

std::size_t grid_rows(std::size_t n) { return (n + kGridColumns - 1) / kGridColumns; }

KeyframeGrid build_keyframe_grid(const Timeline& timeline, const VideoCollection& collection,
                                 const std::filesystem::path& media_root) {
  KeyframeGrid grid;
  const std::size_t n = timeline.size();
  grid.rows = grid_rows(n);
  grid.cols = std::min(n, kGridColumns);
  grid.total_duration_s = total_duration(timeline);

  const int cell_h = kCellHeight + kCaptionHeight;
  const int width = static_cast<int>(std::max<std::size_t>(grid.cols, 1)) * kCellWidth;
  const int height = static_cast<int>(std::max<std::size_t>(grid.rows, 1)) * cell_h;
  cv::Mat canvas(height, width, CV_8UC3, cv::Scalar(24, 24, 24));
  if (n == 0) {
    cv::putText(canvas, "(empty timeline)", {8, cell_h / 2}, cv::FONT_HERSHEY_SIMPLEX, 0.5,
                cv::Scalar(220, 220, 220), 1, cv::LINE_AA);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& clip = timeline.clips[i];
    cv::Mat frame = load_keyframe(clip, i, collection, media_root);
    cv::Mat cell;
    cv::resize(frame, cell, {kCellWidth, kCellHeight}, 0, 0, cv::INTER_AREA);
    const int x = static_cast<int>(i % kGridColumns) * kCellWidth;
    const int y = static_cast<int>(i / kGridColumns) * cell_h;
    cell.copyTo(canvas(cv::Rect(x, y, kCellWidth, kCellHeight)));
    const std::string duration = detail::fixed(clip.duration(), 1) + "s";
    // Hershey fonts are ASCII-only.
    cv::putText(canvas, "#" + std::to_string(i + 1) + " - " + duration, {x + 6, y + kCellHeight + 17},
                cv::FONT_HERSHEY_SIMPLEX, 0.5, cv::Scalar(230, 230, 230), 1, cv::LINE_AA);
    grid.captions.push_back("#" + std::to_string(i + 1) + " — " + duration);
  }
  std::vector<uchar> png;
  cv::imencode(".png", canvas, png);
  grid.png.assign(png.begin(), png.end());
  return grid;
}

std::optional<Choice> parse_verdict(std::string_view reply) {
  static const std::regex pattern(R"([Vv][Ee][Rr][Dd][Ii][Cc][Tt]\s*[:\-]?\s*\**\s*([AB])\b)");
  std::optional<Choice> found;
  const std::string text(reply);
  for (auto it = std::sregex_iterator(text.begin(), text.end(), pattern); it != std::sregex_iterator(); ++it) {
    found = (*it)[1].str() == "A" ? Choice::A : Choice::B;
  }
  if (found) return found;
  const std::string bare = detail::trim(reply);
  if (bare == "A") return Choice::A;
  if (bare == "B") return Choice::B;
  return std::nullopt;
}

bool swap_slots(std::string_view pair_id, std::uint64_t seed) {
  std::uint64_t state = seed ^ fnv1a64(pair_id);
  return (detail::splitmix64(state) & 1U) != 0;
}

json to_json(const JudgeVerdict& v) {
  return {{"pair_id", v.pair_id},
          {"slot_assignment", {{"A", v.swapped ? "tau2" : "tau1"}, {"B", v.swapped ? "tau1" : "tau2"}}},
          {"reply", v.rationale},
          {"preferred", v.preferred == Choice::A ? "tau1" : "tau2"}};
}

namespace {

std::string grid_listing(std::string_view slot, const KeyframeGrid& grid) {
  std::string text = "Timeline " + std::string(slot) + ": " + std::to_string(grid.captions.size()) +
                     " sub-clips, total duration " + detail::fixed(grid.total_duration_s, 1) + "s";
  for (const auto& c : grid.captions) text += "\n" + c;
  return text;
}

}  // namespace

JudgeVerdict judge(std::string_view pair_id, std::string_view request, const KeyframeGrid& tau1,
                   const KeyframeGrid& tau2, ChatGateway& gateway, std::uint64_t seed) {
  JudgeVerdict verdict;
  verdict.pair_id = std::string(pair_id);
  verdict.swapped = swap_slots(pair_id, seed);
  const KeyframeGrid& slot_a = verdict.swapped ? tau2 : tau1;
  const KeyframeGrid& slot_b = verdict.swapped ? tau1 : tau2;

  ChatMessage content{"user",
                      "User request:\n" + std::string(request) + "\n\n" + grid_listing("A", slot_a) + "\n\n" +
                          grid_listing("B", slot_b) +
                          "\n\nThe first image is the keyframe grid of timeline A, the second that of timeline B.",
                      {{"image/png", base64_encode(slot_a.png)}, {"image/png", base64_encode(slot_b.png)}}};
  CompletionRequest req{{{"system", std::string(prompt_template(PromptRole::Judge)), {}}, std::move(content)},
                        std::nullopt,
                        default_temperature(PromptRole::Judge),
                        static_cast<std::int64_t>(seed)};
  for (int attempt = 0; attempt < 2; ++attempt) {
    const std::string reply = gateway.complete(req);
    if (const auto slot = parse_verdict(reply)) {
      const bool tau1_won = (*slot == Choice::A) != verdict.swapped;
      verdict.preferred = tau1_won ? Choice::A : Choice::B;
      verdict.rationale = reply;
      return verdict;
    }
    req.messages.push_back({"assistant", reply, {}});
    req.messages.push_back(
        {"user", "Finish with a final line that reads exactly \"Verdict: A\" or \"Verdict: B\".", {}});
  }
  throw UnparseableVerdict("judge gave no verdict for pair \"" + std::string(pair_id) + "\"");
}

PreferenceRate preference_rate(std::span<const JudgeVerdict> verdicts, std::string_view m1, std::string_view m2) {
  if (verdicts.empty()) throw EmptyInput("no verdicts");
  std::size_t wins = 0;
  for (const auto& v : verdicts) wins += v.preferred == Choice::A ? 1 : 0;
  return {static_cast<double>(wins) / static_cast<double>(verdicts.size()), verdicts.size(), m1 == m2};
}

}  // namespace editduet
