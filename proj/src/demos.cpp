// SPDX-License-Identifier: Apache-2.0
#include "editduet/demos.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <mutex>

#include "editduet/errors.hpp"
#include "text_util.hpp"

namespace editduet {

namespace {

using nlohmann::json;

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

std::string complete_text(ChatGateway& gateway, std::vector<ChatMessage> messages, PromptRole role,
                          std::int64_t seed) {
  return gateway.complete({std::move(messages), std::nullopt, default_temperature(role), seed});
}

// Builds per-step records from an editor history: the state after step i is
// the observation seen before step i + 1. Search steps carry their listing.
std::vector<TrajectoryStep> steps_from(const EditorHistory& history, const Environment& env) {
  std::vector<TrajectoryStep> steps;
  const auto& h = history.steps;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const bool last = i + 1 == h.size();
    std::string outcome = h[i].outcome;
    if (std::holds_alternative<SearchCollection>(h[i].action)) {
      outcome += "\n" + render_search_results(env.collection(), last ? env.search_panel() : h[i + 1].observation.o_search);
    }
    steps.push_back({to_json(h[i].action), std::move(outcome),
                     last ? render_view(env.timeline(), Audience::Editor) : h[i + 1].observation.tau_view});
  }
  return steps;
}

std::uint64_t attempt_seed(std::uint64_t seed, std::size_t attempt) {
  std::uint64_t state = seed ^ (0x5eedULL + attempt);
  return detail::splitmix64(state);
}

void rethrow_gateway(const EpisodeFailure& e) {
  if (e.kind() == FailureKind::GatewayFailure) throw GatewayError(GatewayErrorKind::Transport, e.what());
}

}  // namespace

int extract_score(std::string_view reply) {
  std::optional<int> last;
  for (std::size_t i = 0; i < reply.size(); ++i) {
    if (!is_digit(reply[i])) continue;
    const bool prev_ok = i == 0 || (!is_alnum(reply[i - 1]) && reply[i - 1] != '.');
    const bool next_ok = i + 1 == reply.size() ||
                         (!is_alnum(reply[i + 1]) &&
                          !(reply[i + 1] == '.' && i + 2 < reply.size() && is_digit(reply[i + 2])));
    if (!prev_ok || !next_ok) continue;
    std::size_t j = i;
    while (j > 0 && reply[j - 1] == ' ') --j;
    if (j > 0 && reply[j - 1] == '/') continue;
    last = reply[i] - '0';
  }
  if (!last) throw UnparseableScore("scorer reply contains no standalone digit");
  if (*last < 1 || *last > 5) throw UnparseableScore("score " + std::to_string(*last) + " outside 1-5");
  return *last;
}

std::string extract_label(std::string_view reply, std::string_view marker) {
  std::size_t found = std::string_view::npos;
  std::size_t pos = 0;
  while (pos <= reply.size()) {
    const auto end = std::min(reply.find('\n', pos), reply.size());
    std::string_view line = reply.substr(pos, end - pos);
    while (!line.empty() && (line.front() == ' ' || line.front() == '*' || line.front() == '#')) line.remove_prefix(1);
    if (line.substr(0, marker.size()) == marker) found = static_cast<std::size_t>(line.data() - reply.data());
    pos = end + 1;
  }
  if (found == std::string_view::npos) return detail::trim(reply);
  std::string label = detail::trim(reply.substr(found + marker.size()));
  while (!label.empty() && label.front() == '*') label.erase(0, 1);
  return detail::trim(label);
}

std::vector<json> trajectory_actions(const ExploredTrajectory& trajectory) {
  std::vector<json> actions;
  for (const auto& s : trajectory.steps) actions.push_back(s.action);
  return actions;
}

ExploredTrajectory explore_editor(const ExplorationEnv& env, const Timeline& initial, ChatGateway& gateway,
                                  const EpisodeConfig& config) {
  Environment environment(*env.collection, *env.embedder, env.aroll.text, initial);
  EditorHistory history;
  EpisodeLog log;
  run_editor_round(environment, history, std::nullopt, {}, gateway, config, log, PromptRole::EditorExplorer);
  return {initial, environment.timeline(), steps_from(history, environment)};
}

std::string label_editor(const ExploredTrajectory& trajectory, ChatGateway& gateway, std::int64_t seed) {
  PromptContext ctx;
  ctx.initial_view = render_view(trajectory.initial, Audience::Critic);
  ctx.final_view = render_view(trajectory.final, Audience::Critic);
  const auto reply = complete_text(gateway, assemble_prompt(PromptRole::EditorLabeler, {}, ctx),
                                   PromptRole::EditorLabeler, seed);
  return extract_label(reply, "Feedback:");
}

int score_editor(const ExploredTrajectory& trajectory, std::string_view label, ChatGateway& gateway,
                 std::int64_t seed) {
  PromptContext ctx;
  ctx.label = std::string(label);
  ctx.initial_view = render_view(trajectory.initial, Audience::Editor);
  ctx.final_view = render_view(trajectory.final, Audience::Editor);
  ctx.trajectory = trajectory.steps;
  return extract_score(complete_text(gateway, assemble_prompt(PromptRole::EditorScorer, {}, ctx),
                                     PromptRole::EditorScorer, seed));
}

std::optional<ExploredTrajectory> reflect_editor(const ExploredTrajectory& trajectory, std::string_view label,
                                                 const ExplorationEnv& env, ChatGateway& gateway,
                                                 std::int64_t seed) {
  PromptContext ctx;
  ctx.label = std::string(label);
  ctx.initial_view = render_view(trajectory.initial, Audience::Editor);
  ctx.final_view = render_view(trajectory.final, Audience::Editor);
  ctx.trajectory = trajectory.steps;
  CompletionRequest request{assemble_prompt(PromptRole::EditorReflector, {}, ctx), reflection_schema(),
                            default_temperature(PromptRole::EditorReflector), seed};
  const std::string reply = gateway.complete(request);

  std::vector<EditorAction> actions;
  try {
    const json doc = json::parse(reply);
    if (!doc.is_object() || !doc.contains("actions") || !doc["actions"].is_array()) return std::nullopt;
    for (const auto& wire : doc["actions"]) {
      auto parsed = parse_editor_action(wire);
      if (std::holds_alternative<ParseFailure>(parsed)) return std::nullopt;
      actions.push_back(std::get<EditorAction>(parsed));
    }
  } catch (const json::parse_error&) {
    return std::nullopt;
  }
  // Anything after the first DONE is dropped.
  const auto done = std::find_if(actions.begin(), actions.end(),
                                 [](const EditorAction& a) { return std::holds_alternative<Done>(a); });
  if (done == actions.end()) {
    actions.emplace_back(Done{});
  } else {
    actions.erase(done + 1, actions.end());
  }

  Environment environment(*env.collection, *env.embedder, env.aroll.text, trajectory.initial);
  EpisodeLog log;
  ExploredTrajectory revised;
  revised.initial = trajectory.initial;
  for (const auto& action : actions) {
    std::string outcome = "Done.";
    if (!std::holds_alternative<Done>(action)) {
      try {
        outcome = environment.execute(action, log);
      } catch (const TimelineError&) {
        return std::nullopt;
      }
      if (std::holds_alternative<SearchCollection>(action)) {
        outcome += "\n" + render_search_results(environment.collection(), environment.search_panel());
      }
    }
    revised.steps.push_back({to_json(action), std::move(outcome), render_view(environment.timeline(), Audience::Editor)});
  }
  revised.final = environment.timeline();
  return revised;
}

std::string_view to_string(AttemptOutcome outcome) {
  switch (outcome) {
    case AttemptOutcome::Kept: return "kept";
    case AttemptOutcome::LowScore: return "low_score";
    case AttemptOutcome::Discarded: return "discarded";
  }
  return "?";
}

json to_json(const SynthesisResult& result, DemoStage stage) {
  json attempts = json::array();
  for (const auto& a : result.attempts) {
    attempts.push_back({{"index", a.index},
                        {"outcome", to_string(a.outcome)},
                        {"score", a.score ? json(*a.score) : json(nullptr)},
                        {"rescore", a.rescore ? json(*a.rescore) : json(nullptr)},
                        {"reflected", a.reflected},
                        {"reason", a.reason}});
  }
  return {{"stage", to_string(stage)},
          {"kept", result.demos.size()},
          {"attempts_used", result.attempts.size()},
          {"budget_exhausted", result.budget_exhausted},
          {"attempts", attempts}};
}

namespace {

void keep(SynthesisResult& result, Demonstration demo, const std::optional<std::filesystem::path>& store_dir) {
  if (store_dir) save_demonstration(demo, *store_dir, result.demos.size());
  result.demos.push_back(std::move(demo));
}

}  // namespace

SynthesisResult synthesize_editor_demos(const ExplorationEnv& env, ChatGateway& gateway,
                                        const SynthesisConfig& config,
                                        const std::optional<std::filesystem::path>& store_dir) {
  SynthesisResult result;
  const std::int64_t seed = config.episode.seed;
  for (std::size_t attempt = 0; attempt < config.attempt_budget && result.demos.size() < config.demos_wanted;
       ++attempt) {
    AttemptRecord record;
    record.index = attempt;
    const Timeline initial = init_random(*env.collection, config.initial_clips, attempt_seed(config.seed, attempt));
    std::optional<ExploredTrajectory> trajectory;
    try {
      trajectory = explore_editor(env, initial, gateway, config.episode);
    } catch (const EpisodeFailure& e) {
      rethrow_gateway(e);
      record.reason = std::string(to_string(e.kind())) + ": " + e.what();
      result.attempts.push_back(std::move(record));
      continue;
    }
    const std::string label = label_editor(*trajectory, gateway, seed);
    try {
      record.score = score_editor(*trajectory, label, gateway, seed);
      if (*record.score == kReflectScore) {
        record.reflected = true;
        auto revised = reflect_editor(*trajectory, label, env, gateway, seed);
        if (!revised) {
          record.reason = "reflection could not be replayed";
          result.attempts.push_back(std::move(record));
          continue;
        }
        trajectory = std::move(revised);
        record.rescore = score_editor(*trajectory, label, gateway, seed);
      }
    } catch (const UnparseableScore& e) {
      record.reason = e.what();
      result.attempts.push_back(std::move(record));
      continue;
    }
    const int final_score = record.rescore ? *record.rescore : *record.score;
    if (final_score == kKeepScore) {
      record.outcome = AttemptOutcome::Kept;
      keep(result,
           {DemoStage::Editor, label, trajectory_actions(*trajectory),
            render_view(trajectory->initial, Audience::Editor), render_view(trajectory->final, Audience::Editor),
            final_score, record.reflected},
           store_dir);
    } else {
      record.outcome = AttemptOutcome::LowScore;
    }
    result.attempts.push_back(std::move(record));
  }
  result.budget_exhausted = result.demos.size() < config.demos_wanted;
  return result;
}

SynthesisResult synthesize_critic_demos(const ExplorationEnv& env, std::span<const Demonstration> editor_demos,
                                        ChatGateway& gateway, const SynthesisConfig& config,
                                        const std::optional<std::filesystem::path>& store_dir) {
  if (editor_demos.size() < config.demos_wanted && !config.allow_partial_editor_demos) {
    throw InsufficientDemos("critic exploration needs " + std::to_string(config.demos_wanted) +
                            " editor demonstrations, got " + std::to_string(editor_demos.size()));
  }
  CriticSetup critic;
  critic.role = PromptRole::CriticExplorer;
  for (const auto& d : editor_demos) critic.synthetic_labels.push_back(d.label);

  SynthesisResult result;
  const std::int64_t seed = config.episode.seed;
  for (std::size_t attempt = 0; attempt < config.attempt_budget && result.demos.size() < config.demos_wanted;
       ++attempt) {
    AttemptRecord record;
    record.index = attempt;
    EpisodeInputs inputs;
    inputs.collection = env.collection;
    inputs.embedder = env.embedder;
    inputs.aroll = env.aroll;
    inputs.initial_timeline = init_random(*env.collection, config.initial_clips, attempt_seed(config.seed, attempt));
    inputs.editor_demos = editor_demos;
    inputs.critic = critic;
    EpisodeTrace trace;
    const EpisodeResult episode = run_episode(inputs, gateway, config.episode, std::nullopt, &trace);
    if (episode.status == EpisodeStatus::Failed) {
      if (episode.failure_kind == FailureKind::GatewayFailure) {
        throw GatewayError(GatewayErrorKind::Transport, episode.message);
      }
      record.reason = std::string(to_string(*episode.failure_kind)) + ": " + episode.message;
      result.attempts.push_back(std::move(record));
      continue;
    }

    const auto& ch = trace.critic_history.steps;
    PromptContext label_ctx;
    label_ctx.initial_view = render_view(inputs.initial_timeline, Audience::Critic);
    label_ctx.final_view = render_view(episode.final_timeline, Audience::Critic);
    std::vector<json> actions;
    for (std::size_t j = 0; j < ch.size(); ++j) {
      actions.push_back(to_json(ch[j].action));
      label_ctx.trajectory.push_back(
          {actions.back(), "", j + 1 < ch.size() ? ch[j + 1].tau_view : label_ctx.final_view});
    }
    const std::string label = extract_label(
        complete_text(gateway, assemble_prompt(PromptRole::CriticLabeler, {}, label_ctx), PromptRole::CriticLabeler,
                      seed),
        "Request:");

    PromptContext score_ctx;
    score_ctx.label = label;
    score_ctx.final_view = label_ctx.final_view;
    try {
      record.score = extract_score(complete_text(
          gateway, assemble_prompt(PromptRole::CriticScorer, {}, score_ctx), PromptRole::CriticScorer, seed));
    } catch (const UnparseableScore& e) {
      record.reason = e.what();
      result.attempts.push_back(std::move(record));
      continue;
    }
    if (*record.score == kKeepScore) {
      record.outcome = AttemptOutcome::Kept;
      keep(result,
           {DemoStage::Critic, label, std::move(actions), label_ctx.initial_view, label_ctx.final_view, kKeepScore,
            false},
           store_dir);
    } else {
      record.outcome = AttemptOutcome::LowScore;
    }
    result.attempts.push_back(std::move(record));
  }
  result.budget_exhausted = result.demos.size() < config.demos_wanted;
  return result;
}

std::string demo_file_name(DemoStage stage, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "_%02zu.json", index);
  return std::string(to_string(stage)) + buf;
}

void save_demonstration(const Demonstration& demo, const std::filesystem::path& dir, std::size_t index) {
  std::filesystem::create_directories(dir);
  const auto path = dir / demo_file_name(demo.stage, index);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json(demo).dump(2) << '\n';
}

std::vector<Demonstration> load_demonstrations(const std::filesystem::path& dir, DemoStage stage) {
  std::vector<std::filesystem::path> files;
  const std::string prefix = std::string(to_string(stage)) + "_";
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && name.rfind(prefix, 0) == 0 && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<Demonstration> demos;
  for (const auto& f : files) {
    std::ifstream in(f);
    try {
      auto demo = parse_demonstration(json::parse(in));
      if (demo.stage != stage) throw SchemaError("stage does not match file name");
      demos.push_back(std::move(demo));
    } catch (const std::exception& e) {
      throw SchemaError(f.string() + ": " + e.what());
    }
  }
  return demos;
}

}  // namespace editduet
