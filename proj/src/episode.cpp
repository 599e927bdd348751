// SPDX-License-Identifier: Apache-2.0
#include "editduet/episode.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <type_traits>

#include "editduet/errors.hpp"
#include "editduet/search.hpp"
#include "text_util.hpp"

namespace editduet {

namespace {

using nlohmann::json;

// Log values are rounded so records do not depend on last-bit float noise.
double round6(double x) { return std::round(x * 1e6) / 1e6; }

template <typename Action>
ParseResult<Action> parse_reply(std::string_view reply) {
  if constexpr (std::is_same_v<Action, EditorAction>) {
    return parse_editor_action(reply);
  } else {
    return parse_critic_action(reply);
  }
}

template <typename Action>
Action decode(PromptRole role, std::vector<ChatMessage> messages, ChatGateway& gateway,
              const EpisodeConfig& config, EpisodeLog& log, Actor actor) {
  const ActionSet set = std::is_same_v<Action, EditorAction> ? ActionSet::Editor : ActionSet::Critic;
  CompletionRequest request{std::move(messages), action_schema(set), default_temperature(role), config.seed};
  ParseFailure last;
  for (std::size_t attempt = 0; attempt <= config.max_parse_retries; ++attempt) {
    log.record(actor, "prompt",
               {{"role", to_string(role)},
                {"attempt", attempt},
                {"messages", request.messages.size()},
                {"request_hash", RecordReplayGateway::request_hash(request)}});
    std::string reply;
    try {
      reply = gateway.complete(request);
    } catch (const GatewayError& e) {
      log.record(actor, "error", {{"kind", to_string(e.kind())}, {"message", e.what()}});
      throw EpisodeFailure(FailureKind::GatewayFailure, e.what());
    }
    auto parsed = parse_reply<Action>(reply);
    if (auto* action = std::get_if<Action>(&parsed)) {
      log.record(actor, "action", to_json(*action));
      return *action;
    }
    last = std::get<ParseFailure>(parsed);
    log.record(actor, "error", {{"kind", to_string(last.kind)}, {"message", last.message}, {"reply", reply}});
    request.messages.push_back({"assistant", reply, {}});
    request.messages.push_back({"user", corrective_message(last, set), {}});
  }
  const FailureKind kind = last.kind == ParseFailureKind::UnknownFunction ? FailureKind::FunctionHallucination
                                                                          : FailureKind::UnparseableOutput;
  throw EpisodeFailure(kind, std::string(to_string(actor)) + " reply rejected after " +
                                 std::to_string(config.max_parse_retries + 1) + " attempts: " + last.message);
}

}  // namespace

void EpisodeConfig::validate() const {
  if (max_editor_steps_per_round < 1) throw std::invalid_argument("max_editor_steps_per_round must be >= 1");
  if (max_critic_rounds < 1) throw std::invalid_argument("max_critic_rounds must be >= 1");
}

std::string_view to_string(EpisodeStatus status) {
  return status == EpisodeStatus::Rendered ? "Rendered" : "Failed";
}

std::string_view to_string(FailureKind kind) {
  switch (kind) {
    case FailureKind::FunctionHallucination: return "FunctionHallucination";
    case FailureKind::FileHallucination: return "FileHallucination";
    case FailureKind::IndexError: return "IndexError";
    case FailureKind::OutOfBoundsSubclip: return "OutOfBoundsSubclip";
    case FailureKind::UnparseableOutput: return "UnparseableOutput";
    case FailureKind::BudgetExhausted: return "BudgetExhausted";
    case FailureKind::GatewayFailure: return "GatewayFailure";
  }
  return "?";
}

FailureKind parse_failure_kind(std::string_view text) {
  for (auto kind : {FailureKind::FunctionHallucination, FailureKind::FileHallucination, FailureKind::IndexError,
                    FailureKind::OutOfBoundsSubclip, FailureKind::UnparseableOutput,
                    FailureKind::BudgetExhausted, FailureKind::GatewayFailure}) {
    if (to_string(kind) == text) return kind;
  }
  throw SchemaError("unknown failure kind \"" + std::string(text) + "\"");
}

FailureKind failure_kind_for(TimelineErrorKind kind) {
  switch (kind) {
    case TimelineErrorKind::UnknownFile: return FailureKind::FileHallucination;
    case TimelineErrorKind::OutOfBounds:
    case TimelineErrorKind::InvertedRange: return FailureKind::OutOfBoundsSubclip;
    case TimelineErrorKind::BadIndex: return FailureKind::IndexError;
  }
  return FailureKind::IndexError;
}

json to_json(const EpisodeResult& result) {
  json doc = {{"status", to_string(result.status)},
              {"failure_kind", result.failure_kind ? json(to_string(*result.failure_kind)) : json(nullptr)},
              {"message", result.message},
              {"critic_rounds", result.critic_rounds},
              {"editor_steps", result.editor_steps},
              {"clips", result.final_timeline.size()},
              {"duration_s", round6(total_duration(result.final_timeline))},
              {"log_ref", result.log_ref}};
  if (result.target_s) doc["target_s"] = *result.target_s;
  return doc;
}

EpisodeResult load_episode_result(const std::filesystem::path& run_dir) {
  const auto result_path = run_dir / kResultFile;
  std::ifstream in(result_path);
  if (!in) throw SchemaError("cannot read " + result_path.string());
  EpisodeResult result;
  try {
    const json doc = json::parse(in);
    const auto status = doc.at("status").get<std::string>();
    if (status == "Rendered") {
      result.status = EpisodeStatus::Rendered;
    } else if (status == "Failed") {
      result.status = EpisodeStatus::Failed;
    } else {
      throw SchemaError(result_path.string() + ": status must be Rendered or Failed");
    }
    if (doc.contains("failure_kind") && !doc["failure_kind"].is_null()) {
      result.failure_kind = parse_failure_kind(doc["failure_kind"].get<std::string>());
    }
    if ((result.status == EpisodeStatus::Failed) != result.failure_kind.has_value()) {
      throw SchemaError(result_path.string() + ": failure_kind must be present exactly when status is Failed");
    }
    result.message = doc.value("message", "");
    result.critic_rounds = doc.value("critic_rounds", std::size_t{0});
    result.editor_steps = doc.value("editor_steps", std::size_t{0});
    result.log_ref = doc.value("log_ref", "");
    if (doc.contains("target_s") && !doc["target_s"].is_null()) result.target_s = doc["target_s"].get<double>();
  } catch (const json::exception& e) {
    throw SchemaError(result_path.string() + ": " + e.what());
  }
  result.final_timeline = load_timeline(run_dir / kTimelineFile).timeline;
  return result;
}

std::string_view to_string(Actor actor) {
  switch (actor) {
    case Actor::Editor: return "editor";
    case Actor::Critic: return "critic";
    case Actor::Env: return "env";
  }
  return "?";
}

void EpisodeLog::record(Actor actor, std::string_view event, json payload) {
  records_.push_back({{"t", t_++}, {"actor", to_string(actor)}, {"event", event}, {"payload", std::move(payload)}});
}

std::string EpisodeLog::to_jsonl() const {
  std::string out;
  for (const auto& r : records_) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

void EpisodeLog::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_jsonl();
}

Environment::Environment(const VideoCollection& collection, const TextEmbedder& embedder, std::string transcript,
                         Timeline initial)
    : collection_(&collection),
      embedder_(&embedder),
      transcript_(std::move(transcript)),
      timeline_(std::move(initial)) {}

Observation Environment::observe(Audience audience) const {
  return {transcript_, collection_->summary, o_search_, render_view(timeline_, audience)};
}

namespace {

struct Executor {
  Environment& env;
  const VideoCollection& collection;
  const TextEmbedder& embedder;
  Timeline& timeline;
  std::vector<SearchResult>& panel;
  EpisodeLog& log;

  std::string mutated(std::string_view op) {
    log.record(Actor::Env, "mutation",
               {{"op", op},
                {"revision", timeline.revision},
                {"clips", timeline.size()},
                {"duration_s", round6(total_duration(timeline))}});
    return "Timeline updated: " + std::to_string(timeline.size()) + (timeline.size() == 1 ? " clip" : " clips") +
           ", total duration " +
           detail::fixed(total_duration(timeline), 1) + "s.";
  }

  std::string operator()(const SearchCollection& a) {
    panel = search_collection(collection, a.query, embedder);
    json results = json::array();
    for (const auto& r : panel) {
      const auto& s = collection.segments[r.segment];
      results.push_back({{"file", s.source_file},
                         {"start", round6(s.start_s)},
                         {"end", round6(s.end_s())},
                         {"score", round6(r.score)}});
    }
    log.record(Actor::Env, "mutation", {{"op", "search_collection"}, {"query", a.query}, {"results", results}});
    return "Search returned " + std::to_string(panel.size()) + (panel.size() == 1 ? " result" : " results") +
           "; the search panel now shows them.";
  }
  std::string operator()(const AddToTimeline& a) {
    timeline = add_to_timeline(timeline, a.v, a.k, a.t_s, a.t_e, collection);
    return mutated("add_to_timeline");
  }
  std::string operator()(const RemoveFromTimeline& a) {
    timeline = remove_from_timeline(timeline, a.k);
    return mutated("remove_from_timeline");
  }
  std::string operator()(const SwitchClipPositions& a) {
    timeline = switch_clip_positions(timeline, a.k, a.l);
    return mutated("switch_clip_positions");
  }
  std::string operator()(const MoveClip& a) {
    timeline = move_clip(timeline, a.k, a.l);
    return mutated("move_clip");
  }
  std::string operator()(const Done&) { return "Done."; }
};

}  // namespace

std::string Environment::execute(const EditorAction& action, EpisodeLog& log) {
  Executor exec{*this, *collection_, *embedder_, timeline_, o_search_, log};
  return std::visit(exec, action);
}

std::size_t run_editor_round(Environment& env, EditorHistory& history, const std::optional<Feedback>& feedback,
                             std::span<const Demonstration> demos, ChatGateway& gateway,
                             const EpisodeConfig& config, EpisodeLog& log, PromptRole role) {
  for (std::size_t step = 0; step < config.max_editor_steps_per_round; ++step) {
    PromptContext ctx;
    ctx.collection = &env.collection();
    ctx.observation = env.observe(Audience::Editor);
    ctx.feedback = feedback;
    ctx.editor_history = history;
    const EditorAction action =
        decode<EditorAction>(role, assemble_prompt(role, demos, ctx), gateway, config, log, Actor::Editor);
    if (std::holds_alternative<Done>(action)) {
      history.steps.push_back({std::move(ctx.observation), action, "Done."});
      return step + 1;
    }
    std::string outcome;
    try {
      outcome = env.execute(action, log);
    } catch (const TimelineError& e) {
      const FailureKind kind = failure_kind_for(e.kind());
      log.record(Actor::Env, "error", {{"kind", to_string(e.kind())}, {"message", e.what()}});
      outcome = "Error (" + std::string(to_string(kind)) + "): " + e.what();
      history.steps.push_back({std::move(ctx.observation), action, outcome});
      if (config.strict_failures) throw EpisodeFailure(kind, e.what());
      continue;
    } catch (const EmbedderError& e) {
      log.record(Actor::Env, "error", {{"kind", "EmbedderError"}, {"message", e.what()}});
      history.steps.push_back({std::move(ctx.observation), action, std::string("Error: ") + e.what()});
      throw EpisodeFailure(FailureKind::GatewayFailure, e.what());
    }
    history.steps.push_back({std::move(ctx.observation), action, std::move(outcome)});
  }
  throw EpisodeFailure(FailureKind::BudgetExhausted,
                       "editor took " + std::to_string(config.max_editor_steps_per_round) +
                           " steps without DONE");
}

CriticAction run_critic_round(const Timeline& timeline, const CriticHistory& history, const UserRequest& request,
                              const CriticSetup& critic, ChatGateway& gateway, const EpisodeConfig& config,
                              EpisodeLog& log) {
  PromptContext ctx;
  ctx.observation.tau_view = render_view(timeline, Audience::Critic);
  ctx.request = request;
  ctx.critic_history = history;
  ctx.synthetic_labels = critic.synthetic_labels;
  return decode<CriticAction>(critic.role, assemble_prompt(critic.role, critic.demos, ctx), gateway, config, log,
                              Actor::Critic);
}

EpisodeResult run_episode(const EpisodeInputs& inputs, ChatGateway& gateway, const EpisodeConfig& config,
                          const std::optional<std::filesystem::path>& out_dir, EpisodeTrace* trace) {
  config.validate();
  if (inputs.collection == nullptr || inputs.embedder == nullptr) {
    throw std::invalid_argument("run_episode needs a collection and an embedder");
  }
  if (inputs.critic.role == PromptRole::Critic && detail::trim(inputs.request.text).empty()) {
    throw std::invalid_argument("user request must be non-empty");
  }
  EpisodeTrace local;
  EpisodeTrace& tr = trace != nullptr ? *trace : local;
  tr = EpisodeTrace{};
  Environment env(*inputs.collection, *inputs.embedder, inputs.aroll.text, inputs.initial_timeline);

  EpisodeResult result;
  result.target_s = inputs.target_s;
  try {
    while (true) {
      if (result.critic_rounds == config.max_critic_rounds) {
        throw EpisodeFailure(FailureKind::BudgetExhausted,
                             "critic gave " + std::to_string(config.max_critic_rounds) + " rounds of feedback without RENDER");
      }
      const CriticAction action =
          run_critic_round(env.timeline(), tr.critic_history, inputs.request, inputs.critic, gateway, config, tr.log);
      ++result.critic_rounds;
      tr.critic_history.steps.push_back({render_view(env.timeline(), Audience::Critic), action});
      if (std::holds_alternative<Render>(action)) {
        result.status = EpisodeStatus::Rendered;
        break;
      }
      const Feedback feedback{std::get<GiveFeedback>(action).f, result.critic_rounds};
      run_editor_round(env, tr.editor_history, feedback, inputs.editor_demos, gateway, config, tr.log);
    }
  } catch (const EpisodeFailure& e) {
    result.status = EpisodeStatus::Failed;
    result.failure_kind = e.kind();
    result.message = e.what();
    tr.log.record(Actor::Env, "error", {{"failure_kind", to_string(e.kind())}, {"message", e.what()}});
  }
  result.editor_steps = tr.editor_history.steps.size();
  result.final_timeline = env.timeline();

  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    result.log_ref = std::string(kEpisodeLogFile);
    TimelineDocument doc;
    if (!inputs.request.text.empty()) doc.request = inputs.request.text;
    doc.timeline = result.final_timeline;
    doc.history_ref = std::string(kEpisodeLogFile);
    save_timeline(doc, *out_dir / kTimelineFile);
    tr.log.save(*out_dir / kEpisodeLogFile);
    std::ofstream out(*out_dir / kResultFile, std::ios::binary);
    out << to_json(result).dump(2) << '\n';
  }
  return result;
}

}  // namespace editduet
