// SPDX-License-Identifier: Apache-2.0
#include "editduet/actions.hpp"

#include <array>
#include <cmath>
#include <span>

#include "text_util.hpp"

namespace editduet {
namespace {

using nlohmann::json;

enum class ArgType { Text, Index, Seconds };

struct ArgSpec {
  std::string_view name;
  ArgType type;
};

struct ToolSpec {
  std::string_view name;
  std::span<const ArgSpec> args;
};

constexpr std::array<ArgSpec, 1> kSearchArgs{{{"query", ArgType::Text}}};
constexpr std::array<ArgSpec, 4> kAddArgs{
    {{"v", ArgType::Text}, {"k", ArgType::Index}, {"t_s", ArgType::Seconds}, {"t_e", ArgType::Seconds}}};
constexpr std::array<ArgSpec, 1> kRemoveArgs{{{"k", ArgType::Index}}};
constexpr std::array<ArgSpec, 2> kPairArgs{{{"k", ArgType::Index}, {"l", ArgType::Index}}};
constexpr std::array<ArgSpec, 1> kFeedbackArgs{{{"f", ArgType::Text}}};

// Order matches the variant alternatives.
constexpr std::array<ToolSpec, 6> kEditorTools{{
    {"search_collection", kSearchArgs},
    {"add_to_timeline", kAddArgs},
    {"remove_from_timeline", kRemoveArgs},
    {"switch_clip_positions", kPairArgs},
    {"move_clip", kPairArgs},
    {"DONE", {}},
}};

constexpr std::array<ToolSpec, 2> kCriticTools{{
    {"give_feedback", kFeedbackArgs},
    {"RENDER", {}},
}};

std::span<const ToolSpec> tools_for(ActionSet set) {
  if (set == ActionSet::Editor) return kEditorTools;
  return kCriticTools;
}

ParseFailure failure(ParseFailureKind kind, std::string message, std::string tool = {}) {
  return {kind, std::move(message), std::move(tool)};
}

std::string strip_fence(std::string_view raw) {
  std::string text = detail::trim(raw);
  if (text.rfind("```", 0) == 0) {
    const auto newline = text.find('\n');
    const auto close = text.rfind("```");
    if (newline != std::string::npos && close != std::string::npos && close > newline) {
      text = detail::trim(std::string_view(text).substr(newline + 1, close - newline - 1));
    }
  }
  return text;
}

// Validated argument object, or the failure describing why not.
struct Checked {
  const ToolSpec* tool = nullptr;
  json args;
};

std::variant<Checked, ParseFailure> check_wire(const json& wire, ActionSet set) {
  if (!wire.is_object() || !wire.contains("tool") || !wire["tool"].is_string()) {
    return failure(ParseFailureKind::NotParseable, "expected an object {\"tool\": name, \"args\": {...}}");
  }
  for (const auto& [key, _] : wire.items()) {
    if (key != "tool" && key != "args") {
      return failure(ParseFailureKind::NotParseable, "unexpected top-level key \"" + key + "\"");
    }
  }
  const std::string name = wire["tool"].get<std::string>();
  const ToolSpec* tool = nullptr;
  for (const auto& t : tools_for(set)) {
    if (t.name == name) tool = &t;
  }
  if (tool == nullptr) {
    return failure(ParseFailureKind::UnknownFunction, "function \"" + name + "\" does not exist", name);
  }
  json args = wire.contains("args") ? wire["args"] : json::object();
  if (args.is_null()) args = json::object();
  if (!args.is_object()) return failure(ParseFailureKind::BadType, "\"args\" must be an object", name);

  for (const auto& arg : tool->args) {
    if (!args.contains(std::string(arg.name))) {
      return failure(ParseFailureKind::BadArity,
                     name + " is missing argument \"" + std::string(arg.name) + "\"", name);
    }
  }
  for (const auto& [key, value] : args.items()) {
    const ArgSpec* arg = nullptr;
    for (const auto& s : tool->args) {
      if (s.name == key) arg = &s;
    }
    if (arg == nullptr) {
      return failure(ParseFailureKind::BadArity, name + " takes no argument \"" + key + "\"", name);
    }
    const std::string where = name + "." + key;
    switch (arg->type) {
      case ArgType::Text:
        if (!value.is_string()) return failure(ParseFailureKind::BadType, where + " must be a string", name);
        if (detail::trim(value.get<std::string>()).empty()) {
          return failure(ParseFailureKind::BadType, where + " must be non-empty", name);
        }
        break;
      case ArgType::Index:
        if (!value.is_number_integer()) {
          return failure(ParseFailureKind::BadType, where + " must be an integer", name);
        }
        break;
      case ArgType::Seconds:
        if (!value.is_number() || !std::isfinite(value.get<double>())) {
          return failure(ParseFailureKind::BadType, where + " must be a number of seconds", name);
        }
        break;
    }
  }
  return Checked{tool, std::move(args)};
}

std::variant<json, ParseFailure> parse_text(std::string_view raw) {
  const std::string text = strip_fence(raw);
  if (text.empty()) return failure(ParseFailureKind::NotParseable, "empty reply");
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return failure(ParseFailureKind::NotParseable, "reply is not a JSON tool call");
  }
}

}  // namespace

std::string_view to_string(ParseFailureKind kind) {
  switch (kind) {
    case ParseFailureKind::UnknownFunction: return "UnknownFunction";
    case ParseFailureKind::BadArity: return "BadArity";
    case ParseFailureKind::BadType: return "BadType";
    case ParseFailureKind::NotParseable: return "NotParseable";
  }
  return "?";
}

ParseResult<EditorAction> parse_editor_action(const json& wire) {
  auto checked = check_wire(wire, ActionSet::Editor);
  if (auto* f = std::get_if<ParseFailure>(&checked)) return *f;
  const auto& [tool, args] = std::get<Checked>(checked);
  const std::string_view name = tool->name;
  if (name == "search_collection") return SearchCollection{args["query"].get<std::string>()};
  if (name == "add_to_timeline") {
    return AddToTimeline{args["v"].get<std::string>(), args["k"].get<std::int64_t>(),
                         args["t_s"].get<double>(), args["t_e"].get<double>()};
  }
  if (name == "remove_from_timeline") return RemoveFromTimeline{args["k"].get<std::int64_t>()};
  if (name == "switch_clip_positions") {
    return SwitchClipPositions{args["k"].get<std::int64_t>(), args["l"].get<std::int64_t>()};
  }
  if (name == "move_clip") return MoveClip{args["k"].get<std::int64_t>(), args["l"].get<std::int64_t>()};
  return Done{};
}

ParseResult<CriticAction> parse_critic_action(const json& wire) {
  auto checked = check_wire(wire, ActionSet::Critic);
  if (auto* f = std::get_if<ParseFailure>(&checked)) return *f;
  const auto& [tool, args] = std::get<Checked>(checked);
  if (tool->name == "give_feedback") return GiveFeedback{args["f"].get<std::string>()};
  return Render{};
}

ParseResult<EditorAction> parse_editor_action(std::string_view raw) {
  auto parsed = parse_text(raw);
  if (auto* f = std::get_if<ParseFailure>(&parsed)) return *f;
  return parse_editor_action(std::get<json>(parsed));
}

ParseResult<CriticAction> parse_critic_action(std::string_view raw) {
  auto parsed = parse_text(raw);
  if (auto* f = std::get_if<ParseFailure>(&parsed)) return *f;
  return parse_critic_action(std::get<json>(parsed));
}

namespace {

struct EditorToJson {
  json operator()(const SearchCollection& a) const {
    return {{"tool", "search_collection"}, {"args", {{"query", a.query}}}};
  }
  json operator()(const AddToTimeline& a) const {
    return {{"tool", "add_to_timeline"}, {"args", {{"v", a.v}, {"k", a.k}, {"t_s", a.t_s}, {"t_e", a.t_e}}}};
  }
  json operator()(const RemoveFromTimeline& a) const {
    return {{"tool", "remove_from_timeline"}, {"args", {{"k", a.k}}}};
  }
  json operator()(const SwitchClipPositions& a) const {
    return {{"tool", "switch_clip_positions"}, {"args", {{"k", a.k}, {"l", a.l}}}};
  }
  json operator()(const MoveClip& a) const {
    return {{"tool", "move_clip"}, {"args", {{"k", a.k}, {"l", a.l}}}};
  }
  json operator()(const Done&) const { return {{"tool", "DONE"}, {"args", json::object()}}; }
};

struct CriticToJson {
  json operator()(const GiveFeedback& a) const {
    return {{"tool", "give_feedback"}, {"args", {{"f", a.f}}}};
  }
  json operator()(const Render&) const { return {{"tool", "RENDER"}, {"args", json::object()}}; }
};

}  // namespace

json to_json(const EditorAction& action) { return std::visit(EditorToJson{}, action); }
json to_json(const CriticAction& action) { return std::visit(CriticToJson{}, action); }
std::string serialize_action(const EditorAction& action) { return to_json(action).dump(); }
std::string serialize_action(const CriticAction& action) { return to_json(action).dump(); }

std::string_view tool_name(const EditorAction& action) { return kEditorTools[action.index()].name; }
std::string_view tool_name(const CriticAction& action) { return kCriticTools[action.index()].name; }

json action_schema(ActionSet set) {
  json variants = json::array();
  for (const auto& tool : tools_for(set)) {
    json properties = json::object();
    json required = json::array();
    for (const auto& arg : tool.args) {
      json prop;
      switch (arg.type) {
        case ArgType::Text: prop = {{"type", "string"}, {"minLength", 1}}; break;
        case ArgType::Index: prop = {{"type", "integer"}}; break;
        case ArgType::Seconds: prop = {{"type", "number"}}; break;
      }
      properties[std::string(arg.name)] = std::move(prop);
      required.push_back(std::string(arg.name));
    }
    variants.push_back({
        {"type", "object"},
        {"properties",
         {{"tool", {{"type", "string"}, {"enum", {std::string(tool.name)}}}},
          {"args",
           {{"type", "object"},
            {"properties", std::move(properties)},
            {"required", std::move(required)},
            {"additionalProperties", false}}}}},
        {"required", {"tool", "args"}},
        {"additionalProperties", false},
    });
  }
  return {{"anyOf", std::move(variants)}};
}

std::string editor_tool_definitions() {
  return R"(def search_collection(query: str) -> list:
    """Search the video collection with a text query. Fills the search panel with up to five
    matching video segments (file, start, end, duration, description, shot type, camera motion)."""

def add_to_timeline(v: str, k: int, t_s: float, t_e: float) -> None:
    """Insert the sub-clip of video file `v` that starts at `t_s` seconds and ends at `t_e`
    seconds at index `k` of the timeline. Later clips shift right. 0 <= k <= len(timeline)."""

def remove_from_timeline(k: int) -> None:
    """Remove the clip at index `k` of the timeline."""

def switch_clip_positions(k: int, l: int) -> None:
    """Swap the clips at indices `k` and `l` of the timeline."""

def move_clip(k: int, l: int) -> None:
    """Move the clip at index `k` so that it ends up at index `l` of the timeline."""

def DONE() -> None:
    """Signal that the feedback has been satisfied and hand control back to the critic."""

Timeline indices are 0-based. Call exactly one tool per reply, written as a JSON object
{"tool": "<name>", "args": {<argument name>: <value>, ...}}.)";
}

}  // namespace editduet
