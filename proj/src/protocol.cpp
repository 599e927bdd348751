// SPDX-License-Identifier: Apache-2.0
#include "editduet/protocol.hpp"

#include <array>
#include <map>
#include <sstream>
#include <stdexcept>

#include "editduet/errors.hpp"
#include "text_util.hpp"

namespace editduet {

namespace detail {
const std::map<std::string, std::string_view>& prompt_assets();
}

namespace {

using nlohmann::json;

constexpr std::string_view kReplyInstruction =
    "Reply with exactly one tool call written as a JSON object of the form "
    "{\"tool\": \"<name>\", \"args\": {...}} and nothing else.";

constexpr std::string_view kScoreInstruction =
    "Give your reasoning first. End your reply with the score as a single digit from 1 to 5 on its "
    "own line.";

std::string replace_slot(std::string text, std::string_view slot, std::string_view value) {
  const auto pos = text.find(slot);
  if (pos != std::string::npos) text.replace(pos, slot.size(), value);
  return text;
}

ChatMessage user(std::string content) { return {"user", std::move(content), {}}; }
ChatMessage assistant(std::string content) { return {"assistant", std::move(content), {}}; }

std::string search_text(const PromptContext& ctx, const std::vector<SearchResult>& results) {
  if (results.empty()) return "(no search results)";
  if (ctx.collection == nullptr) {
    throw std::invalid_argument("prompt context holds search results but no collection");
  }
  return render_search_results(*ctx.collection, results);
}

std::string observation_text(const PromptContext& ctx, const Observation& o) {
  return "Current timeline:\n" + o.tau_view + "\n\nSearch panel:\n" + search_text(ctx, o.o_search);
}

// Observation i carries the outcome of action i-1 so that user and
// assistant turns alternate.
void append_editor_history(std::vector<ChatMessage>& out, const PromptContext& ctx) {
  const auto& steps = ctx.editor_history.steps;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    std::string text;
    if (i > 0) text = "Result of your last action:\n" + steps[i - 1].outcome + "\n\n";
    text += observation_text(ctx, steps[i].observation);
    out.push_back(user(std::move(text)));
    out.push_back(assistant(serialize_action(steps[i].action)));
  }
}

std::string current_editor_turn(const PromptContext& ctx) {
  std::string text;
  const auto& steps = ctx.editor_history.steps;
  if (!steps.empty()) text = "Result of your last action:\n" + steps.back().outcome + "\n\n";
  text += observation_text(ctx, ctx.observation);
  text += "\n\n";
  text += kReplyInstruction;
  return text;
}

void append_critic_history(std::vector<ChatMessage>& out, const PromptContext& ctx) {
  for (const auto& step : ctx.critic_history.steps) {
    out.push_back(user("Current timeline:\n" + step.tau_view));
    out.push_back(assistant(serialize_action(step.action)));
  }
}

std::string current_critic_turn(const PromptContext& ctx) {
  return "Current timeline:\n" + ctx.observation.tau_view + "\n\n" + std::string(kReplyInstruction);
}

std::string trajectory_text(const std::vector<TrajectoryStep>& steps, bool with_views) {
  if (steps.empty()) return "(no actions)";
  std::ostringstream out;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (i > 0) out << "\n\n";
    out << "Step " << i + 1 << ": " << steps[i].action.dump();
    if (!steps[i].outcome.empty()) out << "\nResult:\n" << steps[i].outcome;
    if (with_views) out << "\nTimeline after this step:\n" << steps[i].view_after;
  }
  return out.str();
}

std::string system_text(PromptRole role, std::span<const Demonstration> demos,
                        const PromptContext& ctx) {
  std::string text(prompt_template(role));
  text = replace_slot(std::move(text), kFunctionSlot, editor_tool_definitions());
  text = replace_slot(std::move(text), kExamplesSlot, render_demonstrations(demos));
  if (role == PromptRole::CriticExplorer) {
    std::string labels;
    for (std::size_t i = 0; i < ctx.synthetic_labels.size(); ++i) {
      if (i > 0) labels += '\n';
      labels += "- " + ctx.synthetic_labels[i];
    }
    text = replace_slot(std::move(text), kLabelsSlot, labels);
  }
  return text;
}

}  // namespace

std::string_view to_string(PromptRole role) {
  switch (role) {
    case PromptRole::Editor: return "editor";
    case PromptRole::Critic: return "critic";
    case PromptRole::EditorExplorer: return "editor_explorer";
    case PromptRole::EditorLabeler: return "editor_labeler";
    case PromptRole::EditorScorer: return "editor_scorer";
    case PromptRole::EditorReflector: return "editor_reflector";
    case PromptRole::CriticExplorer: return "critic_explorer";
    case PromptRole::CriticLabeler: return "critic_labeler";
    case PromptRole::CriticScorer: return "critic_scorer";
    case PromptRole::Judge: return "judge";
  }
  return "?";
}

std::string_view template_name(PromptRole role) {
  switch (role) {
    case PromptRole::Editor: return "01_editor";
    case PromptRole::Critic: return "02_critic";
    case PromptRole::EditorExplorer: return "03_editor_explorer";
    case PromptRole::EditorLabeler: return "04_editor_labeler";
    case PromptRole::EditorScorer: return "05_editor_scorer";
    case PromptRole::CriticExplorer: return "06_critic_explorer";
    case PromptRole::CriticLabeler: return "07_critic_labeler";
    case PromptRole::CriticScorer: return "08_critic_scorer";
    case PromptRole::EditorReflector: return "09_editor_reflector";
    case PromptRole::Judge: return "10_judge";
  }
  return "?";
}

std::string_view prompt_template(std::string_view name) {
  const auto& assets = detail::prompt_assets();
  const auto it = assets.find(std::string(name));
  if (it == assets.end()) throw MissingTemplate("no prompt template named \"" + std::string(name) + "\"");
  return it->second;
}

std::string_view prompt_template(PromptRole role) { return prompt_template(template_name(role)); }

std::vector<std::string> prompt_template_names() {
  std::vector<std::string> names;
  for (const auto& [name, _] : detail::prompt_assets()) names.push_back(name);
  return names;
}

double default_temperature(PromptRole role) {
  if (role == PromptRole::EditorExplorer || role == PromptRole::CriticExplorer) return 0.7;
  return 0.0;
}

std::optional<ActionSet> action_set(PromptRole role) {
  switch (role) {
    case PromptRole::Editor:
    case PromptRole::EditorExplorer: return ActionSet::Editor;
    case PromptRole::Critic:
    case PromptRole::CriticExplorer: return ActionSet::Critic;
    default: return std::nullopt;
  }
}

std::string_view to_string(DemoStage stage) {
  return stage == DemoStage::Editor ? "editor" : "critic";
}

json to_json(const Demonstration& demo) {
  return {{"stage", to_string(demo.stage)},   {"label", demo.label},
          {"score", demo.score},              {"initial_view", demo.initial_view},
          {"final_view", demo.final_view},    {"trajectory", demo.trajectory},
          {"reflected", demo.reflected}};
}

Demonstration parse_demonstration(const json& doc) {
  try {
    Demonstration demo;
    const auto stage = doc.at("stage").get<std::string>();
    if (stage == "editor") {
      demo.stage = DemoStage::Editor;
    } else if (stage == "critic") {
      demo.stage = DemoStage::Critic;
    } else {
      throw SchemaError("stage: expected \"editor\" or \"critic\", got \"" + stage + "\"");
    }
    demo.label = doc.at("label").get<std::string>();
    demo.score = doc.at("score").get<int>();
    demo.initial_view = doc.at("initial_view").get<std::string>();
    demo.final_view = doc.at("final_view").get<std::string>();
    demo.trajectory = doc.at("trajectory").get<std::vector<json>>();
    demo.reflected = doc.value("reflected", false);
    return demo;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("demonstration: ") + e.what());
  }
}

std::string render_demonstrations(std::span<const Demonstration> demos) {
  std::ostringstream out;
  for (std::size_t i = 0; i < demos.size(); ++i) {
    const auto& d = demos[i];
    if (i > 0) out << "\n\n";
    out << "### Example " << i + 1 << '\n';
    out << (d.stage == DemoStage::Editor ? "Feedback: " : "User request: ") << d.label << '\n';
    out << "Initial timeline:\n" << d.initial_view << '\n';
    out << (d.stage == DemoStage::Editor ? "Actions:" : "Critic actions:");
    for (std::size_t s = 0; s < d.trajectory.size(); ++s) {
      out << '\n' << s + 1 << ". " << d.trajectory[s].dump();
    }
    out << "\nFinal timeline:\n" << d.final_view;
  }
  return out.str();
}

std::vector<ChatMessage> assemble_prompt(PromptRole role, std::span<const Demonstration> demos,
                                         const PromptContext& ctx) {
  std::vector<ChatMessage> out;
  out.push_back({"system", system_text(role, demos, ctx), {}});
  switch (role) {
    case PromptRole::Editor:
      out.push_back(user("Feedback from the critic:\n" + (ctx.feedback ? ctx.feedback->text : std::string())));
      out.push_back(user("Summary of the video collection:\n" + ctx.observation.o_V));
      out.push_back(user("Voice-over transcript:\n" + ctx.observation.o_A));
      append_editor_history(out, ctx);
      out.push_back(user(current_editor_turn(ctx)));
      break;
    case PromptRole::EditorExplorer:
      out.push_back(user("Summary of the video collection:\n" + ctx.observation.o_V));
      append_editor_history(out, ctx);
      out.push_back(user(current_editor_turn(ctx)));
      break;
    case PromptRole::Critic:
      out.push_back(user("User request:\n" + (ctx.request ? ctx.request->text : std::string())));
      append_critic_history(out, ctx);
      out.push_back(user(current_critic_turn(ctx)));
      break;
    case PromptRole::CriticExplorer:
      append_critic_history(out, ctx);
      out.push_back(user(current_critic_turn(ctx)));
      break;
    case PromptRole::EditorLabeler:
      out.push_back(user("Initial timeline:\n" + ctx.initial_view + "\n\nFinal timeline:\n" + ctx.final_view +
                         "\n\nEnd your reply with a line that starts with \"Feedback:\" followed by the "
                         "feedback paragraph."));
      break;
    case PromptRole::EditorScorer:
      out.push_back(user("User feedback:\n" + ctx.label + "\n\nInitial timeline:\n" + ctx.initial_view +
                         "\n\nIntermediate changes:\n" + trajectory_text(ctx.trajectory, true) +
                         "\n\nFinal timeline:\n" + ctx.final_view + "\n\n" + std::string(kScoreInstruction)));
      break;
    case PromptRole::EditorReflector:
      out.push_back(user("Feedback:\n" + ctx.label + "\n\nInitial timeline:\n" + ctx.initial_view +
                         "\n\nActions taken:\n" + trajectory_text(ctx.trajectory, false) +
                         "\n\nFinal timeline:\n" + ctx.final_view +
                         "\n\nReply with a JSON object {\"actions\": [...]} listing the revised tool calls, "
                         "each written as {\"tool\": \"<name>\", \"args\": {...}}."));
      break;
    case PromptRole::CriticLabeler:
      out.push_back(user("Initial timeline:\n" + ctx.initial_view + "\n\nFeedback given before rendering:\n" +
                         trajectory_text(ctx.trajectory, true) + "\n\nFinal timeline:\n" + ctx.final_view +
                         "\n\nEnd your reply with a line that starts with \"Request:\" followed by the user "
                         "query."));
      break;
    case PromptRole::CriticScorer:
      out.push_back(user("User query:\n" + ctx.label + "\n\nFinal timeline:\n" + ctx.final_view + "\n\n" +
                         std::string(kScoreInstruction)));
      break;
    case PromptRole::Judge:
      throw std::invalid_argument("judge prompts are assembled by the judge");
  }
  return out;
}

std::string corrective_message(const ParseFailure& failure, ActionSet set) {
  std::string text = "Your last reply could not be executed (" + std::string(to_string(failure.kind)) +
                     "): " + failure.message + ". Available tools: ";
  text += set == ActionSet::Editor
              ? "search_collection, add_to_timeline, remove_from_timeline, switch_clip_positions, move_clip, DONE"
              : "give_feedback, RENDER";
  text += ". ";
  text += kReplyInstruction;
  return text;
}

json reflection_schema() {
  return {{"type", "object"},
          {"properties", {{"actions", {{"type", "array"}, {"items", action_schema(ActionSet::Editor)}}}}},
          {"required", {"actions"}},
          {"additionalProperties", false}};
}

}  // namespace editduet
