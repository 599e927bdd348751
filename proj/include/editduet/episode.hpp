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

#include "editduet/collection.hpp"
#include "editduet/embedding.hpp"
#include "editduet/gateway.hpp"
#include "editduet/protocol.hpp"
#include "editduet/timeline.hpp"

namespace editduet {

struct EpisodeConfig {
  std::size_t max_editor_steps_per_round = 30;
  std::size_t max_critic_rounds = 8;
  /// Mutation errors end the episode; otherwise they are fed back to the editor.
  bool strict_failures = true;
  std::int64_t seed = 0;
  /// Extra decode attempts after an unusable reply.
  std::size_t max_parse_retries = 2;

  /// Throws std::invalid_argument when a cap is zero.
  void validate() const;
};

enum class EpisodeStatus { Rendered, Failed };

enum class FailureKind {
  FunctionHallucination,
  FileHallucination,
  IndexError,
  OutOfBoundsSubclip,
  UnparseableOutput,
  BudgetExhausted,
  GatewayFailure,
};

std::string_view to_string(EpisodeStatus status);
std::string_view to_string(FailureKind kind);
FailureKind parse_failure_kind(std::string_view text);
FailureKind failure_kind_for(TimelineErrorKind kind);

class EpisodeFailure : public std::runtime_error {
 public:
  EpisodeFailure(FailureKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  FailureKind kind() const { return kind_; }

 private:
  FailureKind kind_;
};

struct EpisodeResult {
  Timeline final_timeline;
  EpisodeStatus status = EpisodeStatus::Failed;
  std::optional<FailureKind> failure_kind;
  std::string message;
  std::size_t critic_rounds = 0;
  std::size_t editor_steps = 0;
  std::string log_ref;
  /// Target duration of the request, when known; used by evaluation.
  std::optional<double> target_s;
};

/// result.json form. The timeline itself lives in timeline.json.
nlohmann::json to_json(const EpisodeResult& result);
/// Reads result.json and timeline.json from a run directory.
EpisodeResult load_episode_result(const std::filesystem::path& run_dir);

inline constexpr std::string_view kTimelineFile = "timeline.json";
inline constexpr std::string_view kEpisodeLogFile = "episode.jsonl";
inline constexpr std::string_view kResultFile = "result.json";

enum class Actor { Editor, Critic, Env };

std::string_view to_string(Actor actor);

/// JSON-lines event log: {"t", "actor", "event", "payload"} with a monotonic
/// counter in place of wall-clock time.
class EpisodeLog {
 public:
  void record(Actor actor, std::string_view event, nlohmann::json payload);
  const std::vector<nlohmann::json>& records() const { return records_; }
  std::string to_jsonl() const;
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<nlohmann::json> records_;
  std::uint64_t t_ = 0;
};

/// Mutable editing state of one episode: the timeline and the search panel.
class Environment {
 public:
  Environment(const VideoCollection& collection, const TextEmbedder& embedder, std::string transcript,
              Timeline initial = {});

  Observation observe(Audience audience) const;
  const Timeline& timeline() const { return timeline_; }
  const VideoCollection& collection() const { return *collection_; }
  const std::vector<SearchResult>& search_panel() const { return o_search_; }
  void clear_search_panel() { o_search_.clear(); }

  /// Applies a non-Done action and returns the outcome text. Throws
  /// TimelineError with the timeline unchanged when a mutation is rejected.
  std::string execute(const EditorAction& action, EpisodeLog& log);

 private:
  const VideoCollection* collection_;
  const TextEmbedder* embedder_;
  std::string transcript_;
  Timeline timeline_;
  std::vector<SearchResult> o_search_;
};

/// Runs editor steps until Done. Throws EpisodeFailure on a strict-mode
/// mutation error, an unusable reply after the retries, a gateway error, or
/// when the step cap is reached without Done. Done counts as a step.
std::size_t run_editor_round(Environment& env, EditorHistory& history, const std::optional<Feedback>& feedback,
                             std::span<const Demonstration> demos, ChatGateway& gateway,
                             const EpisodeConfig& config, EpisodeLog& log,
                             PromptRole role = PromptRole::Editor);

struct CriticSetup {
  PromptRole role = PromptRole::Critic;
  std::span<const Demonstration> demos;
  /// Fills the Critic Explorer label slot.
  std::vector<std::string> synthetic_labels;
};

/// One critic decision on the current timeline.
CriticAction run_critic_round(const Timeline& timeline, const CriticHistory& history,
                              const UserRequest& request, const CriticSetup& critic, ChatGateway& gateway,
                              const EpisodeConfig& config, EpisodeLog& log);

struct EpisodeInputs {
  const VideoCollection* collection = nullptr;
  const TextEmbedder* embedder = nullptr;
  ArollTranscript aroll;
  UserRequest request;
  Timeline initial_timeline;
  std::span<const Demonstration> editor_demos;
  CriticSetup critic;
  /// Copied into the result for evaluation.
  std::optional<double> target_s;
};

/// Histories and log of a finished episode.
struct EpisodeTrace {
  EditorHistory editor_history;
  CriticHistory critic_history;
  EpisodeLog log;
};

/// Alternates critic and editor rounds, critic first, until RENDER, a
/// failure or max_critic_rounds. When out_dir is given, writes timeline.json,
/// episode.jsonl and result.json there.
EpisodeResult run_episode(const EpisodeInputs& inputs, ChatGateway& gateway, const EpisodeConfig& config,
                          const std::optional<std::filesystem::path>& out_dir = std::nullopt,
                          EpisodeTrace* trace = nullptr);

}  // namespace editduet
