// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

#include <nlohmann/json.hpp>

namespace editduet {

// Editor tools. Argument names are the wire names.
struct SearchCollection {
  std::string query;
  bool operator==(const SearchCollection&) const = default;
};
struct AddToTimeline {
  std::string v;
  std::int64_t k = 0;
  double t_s = 0.0;
  double t_e = 0.0;
  bool operator==(const AddToTimeline&) const = default;
};
struct RemoveFromTimeline {
  std::int64_t k = 0;
  bool operator==(const RemoveFromTimeline&) const = default;
};
struct SwitchClipPositions {
  std::int64_t k = 0;
  std::int64_t l = 0;
  bool operator==(const SwitchClipPositions&) const = default;
};
struct MoveClip {
  std::int64_t k = 0;
  std::int64_t l = 0;
  bool operator==(const MoveClip&) const = default;
};
struct Done {
  bool operator==(const Done&) const = default;
};

using EditorAction =
    std::variant<SearchCollection, AddToTimeline, RemoveFromTimeline, SwitchClipPositions, MoveClip, Done>;

// Critic tools.
struct GiveFeedback {
  std::string f;
  bool operator==(const GiveFeedback&) const = default;
};
struct Render {
  bool operator==(const Render&) const = default;
};

using CriticAction = std::variant<GiveFeedback, Render>;

enum class ActionSet { Editor, Critic };

enum class ParseFailureKind { UnknownFunction, BadArity, BadType, NotParseable };

std::string_view to_string(ParseFailureKind kind);

struct ParseFailure {
  ParseFailureKind kind = ParseFailureKind::NotParseable;
  std::string message;
  std::string tool;  // offending tool name, when one was found
};

template <typename Action>
using ParseResult = std::variant<Action, ParseFailure>;

/// Wire form {"tool": name, "args": {...}}. A missing "args" is read as {}.
/// Surrounding whitespace and one Markdown code fence are tolerated; nothing
/// else is.
ParseResult<EditorAction> parse_editor_action(std::string_view raw);
ParseResult<CriticAction> parse_critic_action(std::string_view raw);
ParseResult<EditorAction> parse_editor_action(const nlohmann::json& wire);
ParseResult<CriticAction> parse_critic_action(const nlohmann::json& wire);
inline ParseResult<EditorAction> parse_editor_action(const std::string& raw) {
  return parse_editor_action(std::string_view(raw));
}
inline ParseResult<CriticAction> parse_critic_action(const std::string& raw) {
  return parse_critic_action(std::string_view(raw));
}
inline ParseResult<EditorAction> parse_editor_action(const char* raw) {
  return parse_editor_action(std::string_view(raw));
}
inline ParseResult<CriticAction> parse_critic_action(const char* raw) {
  return parse_critic_action(std::string_view(raw));
}

nlohmann::json to_json(const EditorAction& action);
nlohmann::json to_json(const CriticAction& action);
std::string serialize_action(const EditorAction& action);
std::string serialize_action(const CriticAction& action);

std::string_view tool_name(const EditorAction& action);
std::string_view tool_name(const CriticAction& action);

/// JSON schema (anyOf over tool-discriminated variants) handed to the model
/// as a decoding constraint.
nlohmann::json action_schema(ActionSet set);

/// Python-style signatures of the editor tools, used in editor prompts.
std::string editor_tool_definitions();

}  // namespace editduet
