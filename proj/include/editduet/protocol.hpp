// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "editduet/actions.hpp"
#include "editduet/collection.hpp"
#include "editduet/gateway.hpp"
#include "editduet/search.hpp"

namespace editduet {

enum class PromptRole {
  Editor,
  Critic,
  EditorExplorer,
  EditorLabeler,
  EditorScorer,
  EditorReflector,
  CriticExplorer,
  CriticLabeler,
  CriticScorer,
  Judge,
};

std::string_view to_string(PromptRole role);

/// Asset stem of the role's template, e.g. "01_editor".
std::string_view template_name(PromptRole role);

/// Verbatim template text. Throws MissingTemplate for unknown names.
std::string_view prompt_template(std::string_view name);
std::string_view prompt_template(PromptRole role);
std::vector<std::string> prompt_template_names();

/// Sampling temperature per role: explorers sample, everything else is greedy.
double default_temperature(PromptRole role);

/// Action grammar the role decodes into, if it emits tool calls.
std::optional<ActionSet> action_set(PromptRole role);

struct Observation {
  std::string o_A;  // A-roll transcript
  std::string o_V;  // collection summary
  std::vector<SearchResult> o_search;
  std::string tau_view;
};

struct Feedback {
  std::string text;
  std::size_t critic_step = 0;
};

struct UserRequest {
  std::string text;
};

struct EditorStep {
  Observation observation;
  EditorAction action;
  /// Environment response: search listing, mutation summary or error text.
  std::string outcome;
};

struct CriticStep {
  std::string tau_view;
  CriticAction action;
};

struct EditorHistory {
  std::vector<EditorStep> steps;
};

struct CriticHistory {
  std::vector<CriticStep> steps;
};

enum class DemoStage { Editor, Critic };

std::string_view to_string(DemoStage stage);

struct Demonstration {
  DemoStage stage = DemoStage::Editor;
  /// Synthetic feedback (editor stage) or synthetic request (critic stage).
  std::string label;
  /// Wire-form actions in execution order.
  std::vector<nlohmann::json> trajectory;
  std::string initial_view;
  std::string final_view;
  int score = 0;
  bool reflected = false;
};

nlohmann::json to_json(const Demonstration& demo);
Demonstration parse_demonstration(const nlohmann::json& doc);

/// Action taken during an explored trajectory and what it produced.
struct TrajectoryStep {
  nlohmann::json action;
  std::string outcome;
  std::string view_after;
};

/// Role-specific inputs of assemble_prompt. Fields a role does not use are
/// ignored.
struct PromptContext {
  /// Needed to render o_search entries.
  const VideoCollection* collection = nullptr;
  Observation observation;
  std::optional<Feedback> feedback;
  std::optional<UserRequest> request;
  EditorHistory editor_history;
  CriticHistory critic_history;
  /// Critic Explorer label slot.
  std::vector<std::string> synthetic_labels;
  /// Labelers, scorers and the reflector.
  std::string label;
  std::string initial_view;
  std::string final_view;
  std::vector<TrajectoryStep> trajectory;
};

/// System message (verbatim template, slots filled) followed by the role's
/// context messages in a fixed order. Pure and deterministic.
std::vector<ChatMessage> assemble_prompt(PromptRole role, std::span<const Demonstration> demos,
                                         const PromptContext& context);

/// Serialized demo blocks for the "{in-context examples}" slot.
std::string render_demonstrations(std::span<const Demonstration> demos);

/// Follow-up user message sent after an unusable reply.
std::string corrective_message(const ParseFailure& failure, ActionSet set);

/// Decoding constraint of the reflector: {"actions": [editor action, ...]}.
nlohmann::json reflection_schema();

inline constexpr std::string_view kFunctionSlot = "{function definitions in Python}";
inline constexpr std::string_view kExamplesSlot = "{in-context examples}";
inline constexpr std::string_view kLabelsSlot = "{example synthetic labels from Editor exploration}";

}  // namespace editduet
