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
#include "editduet/episode.hpp"
#include "editduet/gateway.hpp"
#include "editduet/protocol.hpp"
#include "editduet/timeline.hpp"

namespace editduet {

inline constexpr int kKeepScore = 5;
inline constexpr int kReflectScore = 4;

class UnparseableScore : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Stage 2 was asked to start with fewer editor demonstrations than required.
class InsufficientDemos : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Last standalone digit of the reply, ignoring denominators such as the 5
/// in "4/5". Throws UnparseableScore when there is none or it is outside 1-5.
int extract_score(std::string_view reply);

/// Text after the last line starting with `marker` (e.g. "Feedback:"), or
/// the whole trimmed reply when no such line exists.
std::string extract_label(std::string_view reply, std::string_view marker);

struct SynthesisConfig {
  /// Caps for explorer rounds and stage-2 episodes.
  EpisodeConfig episode;
  std::size_t attempt_budget = 100;
  std::size_t demos_wanted = 5;
  /// Clips drawn by init_random for each attempt.
  std::size_t initial_clips = 5;
  std::uint64_t seed = 0;
  /// Lets stage 2 start with fewer than demos_wanted editor demonstrations.
  bool allow_partial_editor_demos = false;
};

struct ExplorationEnv {
  const VideoCollection* collection = nullptr;
  const TextEmbedder* embedder = nullptr;
  ArollTranscript aroll;
};

struct ExploredTrajectory {
  Timeline initial;
  Timeline final;
  std::vector<TrajectoryStep> steps;
};

std::vector<nlohmann::json> trajectory_actions(const ExploredTrajectory& trajectory);

/// Editor Explorer run from `initial` until DONE. Throws EpisodeFailure.
ExploredTrajectory explore_editor(const ExplorationEnv& env, const Timeline& initial, ChatGateway& gateway,
                                  const EpisodeConfig& config);
std::string label_editor(const ExploredTrajectory& trajectory, ChatGateway& gateway, std::int64_t seed);
/// Throws UnparseableScore.
int score_editor(const ExploredTrajectory& trajectory, std::string_view label, ChatGateway& gateway,
                 std::int64_t seed);
/// One refinement pass. The revised actions are replayed strictly from the
/// original initial timeline; a missing trailing DONE is appended. Returns
/// nullopt when the reply cannot be parsed or replayed.
std::optional<ExploredTrajectory> reflect_editor(const ExploredTrajectory& trajectory, std::string_view label,
                                                 const ExplorationEnv& env, ChatGateway& gateway,
                                                 std::int64_t seed);

enum class AttemptOutcome { Kept, LowScore, Discarded };

std::string_view to_string(AttemptOutcome outcome);

struct AttemptRecord {
  std::size_t index = 0;
  AttemptOutcome outcome = AttemptOutcome::Discarded;
  std::optional<int> score;
  std::optional<int> rescore;
  bool reflected = false;
  std::string reason;
};

struct SynthesisResult {
  std::vector<Demonstration> demos;
  std::vector<AttemptRecord> attempts;
  bool budget_exhausted = false;
};

nlohmann::json to_json(const SynthesisResult& result, DemoStage stage);

/// Explore, label, score, reflect at 4, keep 5s. Each kept demonstration is
/// written to store_dir as soon as it is accepted. Gateway errors propagate.
SynthesisResult synthesize_editor_demos(const ExplorationEnv& env, ChatGateway& gateway,
                                        const SynthesisConfig& config,
                                        const std::optional<std::filesystem::path>& store_dir = std::nullopt);

/// Full episodes with the Critic Explorer and the demo-conditioned Editor.
/// Throws InsufficientDemos unless enough editor demonstrations are given.
SynthesisResult synthesize_critic_demos(const ExplorationEnv& env, std::span<const Demonstration> editor_demos,
                                        ChatGateway& gateway, const SynthesisConfig& config,
                                        const std::optional<std::filesystem::path>& store_dir = std::nullopt);

/// File name of the i-th demonstration of a stage, e.g. "editor_00.json".
std::string demo_file_name(DemoStage stage, std::size_t index);
void save_demonstration(const Demonstration& demo, const std::filesystem::path& dir, std::size_t index);
/// All "<stage>_NN.json" files of the directory in name order.
std::vector<Demonstration> load_demonstrations(const std::filesystem::path& dir, DemoStage stage);

}  // namespace editduet
