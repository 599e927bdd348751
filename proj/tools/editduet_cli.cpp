// SPDX-License-Identifier: Apache-2.0
// Command-line front end.
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "editduet/agreement.hpp"
#include "editduet/baseline.hpp"
#include "editduet/collection.hpp"
#include "editduet/demos.hpp"
#include "editduet/episode.hpp"
#include "editduet/errors.hpp"
#include "editduet/gateway.hpp"
#include "editduet/hashing.hpp"
#include "editduet/judge.hpp"
#include "editduet/metrics.hpp"
#include "editduet/render_plan.hpp"
#include "editduet/search.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace editduet;

namespace {

enum ExitCode : int { kOk = 0, kInputError = 2, kBudget = 3, kEpisodeFailure = 4, kGatewayFailure = 5 };

struct Config {
  std::string llm_base_url;
  std::string llm_api_key;
  std::string llm_model;
  std::string judge_model;
  std::string embed_base_url;
  std::int64_t seed = 0;
  std::string mode = "strict";
  EpisodeConfig caps;
  std::string script;
  std::string record_dir;
  std::string replay_dir;

  // API key deliberately left out: the hash goes into manifests.
  json to_json() const {
    return {{"llm_base_url", llm_base_url},
            {"llm_model", llm_model},
            {"judge_model", judge_model},
            {"embed_base_url", embed_base_url},
            {"seed", seed},
            {"mode", mode},
            {"max_editor_steps_per_round", caps.max_editor_steps_per_round},
            {"max_critic_rounds", caps.max_critic_rounds},
            {"max_parse_retries", caps.max_parse_retries},
            {"script", script},
            {"record_dir", record_dir},
            {"replay_dir", replay_dir}};
  }
};

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string g_command_line;

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

std::shared_ptr<ChatGateway> make_gateway(const Config& cfg, bool judge) {
  std::shared_ptr<ChatGateway> inner;
  if (!cfg.script.empty()) {
    inner = std::make_shared<ScriptedGateway>(ScriptedGateway::load_script(cfg.script));
  } else if (cfg.replay_dir.empty()) {
    RemoteConfig remote;
    remote.base_url = cfg.llm_base_url;
    remote.api_key = cfg.llm_api_key;
    remote.model = judge && !cfg.judge_model.empty() ? cfg.judge_model : cfg.llm_model;
    if (remote.base_url.empty() || remote.model.empty()) {
      throw InputError("no model backend: set --llm-base-url and --llm-model (or EDITDUET_LLM_BASE_URL and "
                       "EDITDUET_LLM_MODEL), or pass --script");
    }
    inner = std::make_shared<RemoteGateway>(remote);
  }
  if (!cfg.replay_dir.empty()) return record_replay(cfg.replay_dir, SessionMode::Replay, inner);
  if (!cfg.record_dir.empty()) return record_replay(cfg.record_dir, SessionMode::Record, inner);
  return inner;
}

std::unique_ptr<TextEmbedder> make_embedder(const Config& cfg, const VideoCollection& collection) {
  if (!cfg.embed_base_url.empty()) return std::make_unique<HttpEmbedder>(cfg.embed_base_url, cfg.llm_api_key);
  const auto dim = collection.segments.empty() ? kFallbackEmbeddingDim : collection.embedding_dim();
  return std::make_unique<HashProjectionEmbedder>(dim);
}

EpisodeConfig episode_config(const Config& cfg) {
  EpisodeConfig ec = cfg.caps;
  ec.seed = cfg.seed;
  ec.strict_failures = cfg.mode == "strict";
  return ec;
}

void write_manifest(const fs::path& dir, const Config& cfg, const std::vector<fs::path>& inputs,
                    const std::vector<std::string>& outputs) {
  json hashes = json::object();
  for (const auto& in : inputs) {
    if (fs::is_regular_file(in)) hashes[in.string()] = sha256_file(in);
  }
  write_json(dir / "manifest.json", {{"command", g_command_line},
                                     {"config_hash", sha256_hex(cfg.to_json().dump())},
                                     {"config", cfg.to_json()},
                                     {"input_hashes", hashes},
                                     {"outputs", outputs}});
}

int exit_for(const EpisodeResult& r) {
  if (r.status == EpisodeStatus::Rendered) return kOk;
  return r.failure_kind == FailureKind::GatewayFailure ? kGatewayFailure : kEpisodeFailure;
}

void print_episode(const std::string& name, const EpisodeResult& r) {
  std::cout << name << ": " << to_string(r.status);
  if (r.failure_kind) std::cout << " (" << to_string(*r.failure_kind) << ": " << r.message << ")";
  std::cout << ", " << r.critic_rounds << " critic rounds, " << r.editor_steps << " editor steps, "
            << r.final_timeline.size() << " clips\n";
}

// ---------------------------------------------------------------------------

struct IngestArgs {
  std::string input;
  std::string output;
  bool summarize = false;
};

int cmd_ingest(const Config& cfg, const IngestArgs& a) {
  fs::path input(a.input);
  if (fs::is_directory(input)) input /= "metadata.json";
  VideoCollection collection = load_collection(input);
  if (a.summarize) {
    auto gateway = make_gateway(cfg, false);
    summarize_collection(collection, *gateway);
  }
  const fs::path output = a.output.empty() ? fs::path(input).replace_extension(".normalized.json") : fs::path(a.output);
  save_collection(collection, output);
  std::cout << "collection " << collection.name << ": " << collection.segments.size() << " segments";
  if (collection.dropped_short_segments > 0) {
    std::cout << ", " << collection.dropped_short_segments << " dropped for being shorter than 1s";
  }
  std::cout << "\nwrote " << output.string() << '\n';
  return kOk;
}

struct ExploreArgs {
  std::string collection;
  std::string aroll;
  std::string stage = "both";
  std::string out;
  std::string editor_demos;
  std::size_t budget = 100;
  std::size_t initial_clips = 5;
  bool allow_partial = false;
};

int cmd_explore(const Config& cfg, const ExploreArgs& a) {
  const VideoCollection collection = load_collection(a.collection);
  const auto embedder = make_embedder(cfg, collection);
  ExplorationEnv env{&collection, embedder.get(), a.aroll.empty() ? ArollTranscript{} : load_aroll(a.aroll)};
  auto gateway = make_gateway(cfg, false);
  SynthesisConfig sc;
  sc.episode = episode_config(cfg);
  sc.attempt_budget = a.budget;
  sc.initial_clips = a.initial_clips;
  sc.seed = static_cast<std::uint64_t>(cfg.seed);
  sc.allow_partial_editor_demos = a.allow_partial;
  const fs::path out(a.out);
  fs::create_directories(out);
  json stats = json::object();
  std::vector<std::string> outputs;
  bool exhausted = false;

  std::vector<Demonstration> editor_demos;
  if (a.stage == "editor" || a.stage == "both") {
    const auto r = synthesize_editor_demos(env, *gateway, sc, out);
    stats["editor"] = to_json(r, DemoStage::Editor);
    for (std::size_t i = 0; i < r.demos.size(); ++i) outputs.push_back(demo_file_name(DemoStage::Editor, i));
    std::cout << "editor stage: " << r.demos.size() << " demos in " << r.attempts.size() << " attempts\n";
    exhausted = r.budget_exhausted;
    editor_demos = r.demos;
  } else {
    editor_demos = load_demonstrations(a.editor_demos.empty() ? out : fs::path(a.editor_demos), DemoStage::Editor);
  }
  if (!exhausted && (a.stage == "critic" || a.stage == "both")) {
    const auto r = synthesize_critic_demos(env, editor_demos, *gateway, sc, out);
    stats["critic"] = to_json(r, DemoStage::Critic);
    for (std::size_t i = 0; i < r.demos.size(); ++i) outputs.push_back(demo_file_name(DemoStage::Critic, i));
    std::cout << "critic stage: " << r.demos.size() << " demos in " << r.attempts.size() << " attempts\n";
    exhausted = r.budget_exhausted;
  }
  write_json(out / "explore_stats.json", stats);
  outputs.push_back("explore_stats.json");
  write_manifest(out, cfg, {a.collection, a.aroll}, outputs);
  if (exhausted) {
    std::cerr << "attempt budget exhausted; partial demonstrations written to " << out.string() << '\n';
    return kBudget;
  }
  return kOk;
}

struct EditArgs {
  std::string collection;
  std::string aroll;
  std::string request;
  std::string request_file;
  std::string demos;
  std::string out;
  std::size_t init_random = 0;
  double target = 0.0;
  std::string requests;  // batch file
  std::size_t jobs = 1;
};

struct EditJob {
  std::string id;
  std::string request;
  std::optional<double> target;
  std::size_t init_random = 0;
};

int cmd_edit(const Config& cfg, const EditArgs& a) {
  const VideoCollection collection = load_collection(a.collection);
  const auto embedder = make_embedder(cfg, collection);
  const ArollTranscript aroll = a.aroll.empty() ? ArollTranscript{} : load_aroll(a.aroll);
  std::vector<Demonstration> editor_demos;
  std::vector<Demonstration> critic_demos;
  if (!a.demos.empty()) {
    editor_demos = load_demonstrations(a.demos, DemoStage::Editor);
    critic_demos = load_demonstrations(a.demos, DemoStage::Critic);
  }

  std::vector<EditJob> jobs;
  const bool batch = !a.requests.empty();
  if (batch) {
    const json doc = read_json(a.requests);
    if (!doc.is_array()) throw InputError(a.requests + ": expected an array of requests");
    for (std::size_t i = 0; i < doc.size(); ++i) {
      const auto& r = doc[i];
      if (!r.is_object() || !r.contains("request") || !r["request"].is_string()) {
        throw InputError(a.requests + ": entry " + std::to_string(i) + " needs a \"request\" string");
      }
      EditJob job;
      char id[32];
      std::snprintf(id, sizeof(id), "run_%03zu", i);
      job.id = r.value("id", std::string(id));
      job.request = r["request"].get<std::string>();
      if (r.contains("target_s")) job.target = r["target_s"].get<double>();
      job.init_random = r.value("init_random", a.init_random);
      jobs.push_back(std::move(job));
    }
  } else {
    EditJob job;
    job.request = a.request;
    if (!a.request_file.empty()) {
      std::ifstream in(a.request_file);
      if (!in) throw InputError("cannot read " + a.request_file);
      std::stringstream ss;
      ss << in.rdbuf();
      job.request = ss.str();
    }
    if (job.request.find_first_not_of(" \t\r\n") == std::string::npos) throw InputError("the request is empty");
    if (a.target > 0.0) job.target = a.target;
    job.init_random = a.init_random;
    jobs.push_back(std::move(job));
  }

  auto gateway = make_gateway(cfg, false);
  const EpisodeConfig ec = episode_config(cfg);
  const fs::path out(a.out);
  std::vector<EpisodeResult> results(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());

  auto run_one = [&](std::size_t i) {
    try {
      const auto& job = jobs[i];
      const fs::path dir = batch ? out / job.id : out;
      EpisodeInputs inputs;
      inputs.collection = &collection;
      inputs.embedder = embedder.get();
      inputs.aroll = aroll;
      inputs.request = {job.request};
      if (job.init_random > 0) {
        inputs.initial_timeline = init_random(collection, job.init_random, static_cast<std::uint64_t>(cfg.seed));
      }
      inputs.editor_demos = editor_demos;
      inputs.critic.demos = critic_demos;
      inputs.target_s = job.target;
      results[i] = run_episode(inputs, *gateway, ec, dir);
      write_manifest(dir, cfg, {a.collection, a.aroll, a.demos, a.requests},
                     {std::string(kTimelineFile), std::string(kEpisodeLogFile), std::string(kResultFile)});
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(a.jobs, jobs.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) run_one(i);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  int code = kOk;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    print_episode(batch ? jobs[i].id : out.string(), results[i]);
    code = std::max(code, exit_for(results[i]));
  }
  return code;
}

struct EvalArgs {
  std::string runs_dir;
  std::string targets;
  std::string out;
  std::size_t jobs = 1;
};

int cmd_eval(const Config& cfg, const EvalArgs& a) {
  std::vector<fs::path> runs;
  for (const auto& entry : fs::directory_iterator(a.runs_dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / kResultFile)) runs.push_back(entry.path());
  }
  std::sort(runs.begin(), runs.end());
  if (runs.empty()) throw InputError("no run directories with " + std::string(kResultFile) + " under " + a.runs_dir);
  json target_doc = a.targets.empty() ? json::object() : read_json(a.targets);

  std::vector<EpisodeResult> results(runs.size());
  std::vector<std::exception_ptr> errors(runs.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::max<std::size_t>(1, std::min(a.jobs, runs.size())); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < runs.size(); i = next++) {
        try {
          results[i] = load_episode_result(runs[i]);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<double> targets;
  json rows = json::array();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const std::string name = runs[i].filename().string();
    std::optional<double> target = results[i].target_s;
    if (target_doc.contains(name)) target = target_doc[name].get<double>();
    if (!target && results[i].status == EpisodeStatus::Rendered) {
      throw InputError("no target duration for run " + name);
    }
    targets.push_back(target.value_or(1.0));
    json row = {{"run", name},
                {"status", to_string(results[i].status)},
                {"failure_kind", results[i].failure_kind ? json(to_string(*results[i].failure_kind)) : json(nullptr)},
                {"duration_s", total_duration(results[i].final_timeline)},
                {"repetitions", count_repetitions(results[i].final_timeline)}};
    if (target) {
      row["target_s"] = *target;
      if (results[i].status == EpisodeStatus::Rendered) {
        row["time_coverage"] = time_coverage(*target, total_duration(results[i].final_timeline));
      }
    }
    rows.push_back(std::move(row));
  }
  const MetricsReport report = aggregate(results, targets);
  std::cout << render_report(report);
  if (!a.out.empty()) {
    json doc = to_json(report);
    doc["runs"] = rows;
    write_json(a.out, doc);
  }
  (void)cfg;
  return kOk;
}

struct JudgeArgs {
  std::string request;
  std::string timeline_a;
  std::string timeline_b;
  std::string collection;
  std::string media_root = ".";
  std::string pair_id;
  std::string verdict_log;
  std::string grid_dir;
};

int cmd_judge(const Config& cfg, const JudgeArgs& a) {
  const VideoCollection collection = load_collection(a.collection);
  const auto t1 = load_timeline(a.timeline_a);
  const auto t2 = load_timeline(a.timeline_b);
  const KeyframeGrid g1 = build_keyframe_grid(t1.timeline, collection, a.media_root);
  const KeyframeGrid g2 = build_keyframe_grid(t2.timeline, collection, a.media_root);
  if (!a.grid_dir.empty()) {
    write_text(fs::path(a.grid_dir) / (a.pair_id + "_tau1.png"), g1.png);
    write_text(fs::path(a.grid_dir) / (a.pair_id + "_tau2.png"), g2.png);
  }
  auto gateway = make_gateway(cfg, true);
  const JudgeVerdict v = judge(a.pair_id, a.request, g1, g2, *gateway, static_cast<std::uint64_t>(cfg.seed));
  const json record = to_json(v);
  if (!a.verdict_log.empty()) {
    std::ofstream log(a.verdict_log, std::ios::app | std::ios::binary);
    if (!log) throw std::runtime_error("cannot write " + a.verdict_log);
    log << record.dump() << '\n';
  }
  std::cout << "pair " << v.pair_id << ": preferred " << record["preferred"].get<std::string>() << " (tau1 shown as "
            << (v.swapped ? "B" : "A") << ")\n";
  return kOk;
}

int cmd_pabak(double p) {
  std::printf("%.3f\n", pabak(p));
  return kOk;
}

struct AgreementArgs {
  std::string votes;
  std::string judge_choices;
  std::string out;
};

int cmd_agreement(const AgreementArgs& a) {
  const auto votes = load_votes_csv(a.votes);
  const auto choices = load_choices_csv(a.judge_choices);
  const AgreementStats s = agreement_stats(choices, votes);
  std::printf("pairs                  %zu\n", s.n_pairs);
  std::printf("votes                  %zu\n", s.n_votes);
  std::printf("judge vs majority      %.3f  (PABAK %.3f)\n", s.raw_agreement, s.pabak);
  std::printf("among humans           %.3f  (PABAK %.3f)\n", s.inter_human_agreement, s.inter_human_pabak);
  std::printf("inter-human agreement = mean over pairs of (C(a,2) + C(b,2)) / C(a+b,2)\n");
  if (!a.out.empty()) write_json(a.out, to_json(s));
  return kOk;
}

struct RenderArgs {
  std::string timeline;
  std::string out = "render";
  std::string media_root = ".";
  std::string aroll;
  std::string output_name = "output.mp4";
  bool exec = false;
};

int cmd_render_plan(const Config& cfg, const RenderArgs& a) {
  const auto doc = load_timeline(a.timeline);
  const RenderPlan plan =
      make_render_plan(doc.timeline, a.aroll.empty() ? std::nullopt : std::optional<std::string>(a.aroll),
                       (fs::path(a.out) / a.output_name).string());
  const fs::path out(a.out);
  const auto commands = render_commands(plan, a.media_root, out);
  write_json(out / "render_plan.json", to_json(plan));
  write_text(out / "concat.txt", concat_list(plan, out));
  write_text(out / "render.sh", render_script(commands));
  write_manifest(out, cfg, {a.timeline}, {"render_plan.json", "concat.txt", "render.sh"});
  std::cout << plan.cuts.size() << " cuts; commands in " << (out / "render.sh").string() << '\n';
  if (!a.exec) return kOk;
  const auto missing = missing_media(plan, a.media_root);
  if (!missing.empty()) {
    std::cerr << "missing media:\n";
    for (const auto& m : missing) std::cerr << "  " << m.string() << '\n';
    return kInputError;
  }
  const int status = run_commands(commands);
  if (status != 0) {
    std::cerr << "ffmpeg exited with status " << status << '\n';
    return 1;
  }
  return kOk;
}

int cmd_search(const Config& cfg, const std::string& collection_path, const std::string& query) {
  const VideoCollection collection = load_collection(collection_path);
  const auto embedder = make_embedder(cfg, collection);
  std::cout << render_search_results(collection, search_collection(collection, query, *embedder)) << '\n';
  return kOk;
}

struct BaselineArgs {
  std::string collection;
  std::string request;
  double target = 0.0;
  std::string out;
};

int cmd_baseline(const Config& cfg, const BaselineArgs& a) {
  const VideoCollection collection = load_collection(a.collection);
  const auto embedder = make_embedder(cfg, collection);
  TimelineDocument doc;
  doc.request = a.request;
  doc.timeline = baseline_t2v(collection, a.request, a.target, *embedder);
  if (a.out.empty()) {
    std::cout << render_view(doc.timeline, Audience::Editor) << '\n';
  } else {
    save_timeline(doc, a.out);
    std::cout << doc.timeline.size() << " clips, " << total_duration(doc.timeline) << "s -> " << a.out << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 0; i < argc; ++i) g_command_line += (i ? " " : "") + std::string(argv[i]);

  CLI::App app{"Multi-agent B-roll editing engine"};
  app.require_subcommand(1);
  Config cfg;
  app.add_option("--llm-base-url", cfg.llm_base_url, "OpenAI-compatible API base URL")->envname("EDITDUET_LLM_BASE_URL");
  app.add_option("--llm-api-key", cfg.llm_api_key, "API key")->envname("EDITDUET_LLM_API_KEY");
  app.add_option("--llm-model", cfg.llm_model, "Chat model for the agents")->envname("EDITDUET_LLM_MODEL");
  app.add_option("--judge-model", cfg.judge_model, "Vision model for the judge")->envname("EDITDUET_JUDGE_MODEL");
  app.add_option("--embed-base-url", cfg.embed_base_url, "Text embedding endpoint")->envname("EDITDUET_EMBED_BASE_URL");
  app.add_option("--seed", cfg.seed, "Seed for sampling and initialization")->envname("EDITDUET_SEED");
  app.add_option("--mode", cfg.mode, "Failure handling")->check(CLI::IsMember({"strict", "lenient"}));
  app.add_option("--max-editor-steps", cfg.caps.max_editor_steps_per_round)->check(CLI::PositiveNumber);
  app.add_option("--max-critic-rounds", cfg.caps.max_critic_rounds)->check(CLI::PositiveNumber);
  app.add_option("--max-parse-retries", cfg.caps.max_parse_retries);
  app.add_option("--script", cfg.script, "Scripted model transcript (JSON) instead of a remote model")
      ->check(CLI::ExistingFile);
  auto* record = app.add_option("--record", cfg.record_dir, "Record model exchanges to this directory");
  app.add_option("--replay", cfg.replay_dir, "Serve model replies from a recorded directory")->excludes(record);

  std::function<int()> action;

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Validate and normalize collection metadata");
  c_ingest->add_option("input", ingest.input, "metadata.json or a directory containing it")->required();
  c_ingest->add_option("-o,--output", ingest.output, "Normalized output file");
  c_ingest->add_flag("--summarize", ingest.summarize, "Ask the model for a collection summary");
  c_ingest->callback([&] { action = [&] { return cmd_ingest(cfg, ingest); }; });

  ExploreArgs explore;
  auto* c_explore = app.add_subcommand("explore", "Synthesize in-context demonstrations");
  c_explore->add_option("--collection", explore.collection)->required();
  c_explore->add_option("--aroll", explore.aroll);
  c_explore->add_option("--stage", explore.stage)->check(CLI::IsMember({"editor", "critic", "both"}));
  c_explore->add_option("--out", explore.out, "Demonstration directory")->required();
  c_explore->add_option("--editor-demos", explore.editor_demos, "Editor demos for --stage critic (default: --out)");
  c_explore->add_option("--budget", explore.budget, "Attempts per stage")->check(CLI::PositiveNumber);
  c_explore->add_option("--init-clips", explore.initial_clips)->check(CLI::PositiveNumber);
  c_explore->add_flag("--allow-partial", explore.allow_partial, "Start the critic stage with fewer than 5 editor demos");
  c_explore->callback([&] { action = [&] { return cmd_explore(cfg, explore); }; });

  EditArgs edit;
  auto* c_edit = app.add_subcommand("edit", "Run editing episodes");
  c_edit->add_option("--collection", edit.collection)->required();
  c_edit->add_option("--aroll", edit.aroll);
  auto* req = c_edit->add_option("--request", edit.request, "User request text");
  auto* req_file = c_edit->add_option("--request-file", edit.request_file)->excludes(req);
  c_edit->add_option("--requests", edit.requests, "Batch file: [{id, request, target_s, init_random}]")
      ->excludes(req)
      ->excludes(req_file);
  c_edit->add_option("--demos", edit.demos, "Demonstration directory");
  c_edit->add_option("--out", edit.out, "Run directory (batch: parent of run directories)")->required();
  c_edit->add_option("--init-random", edit.init_random, "Start from N randomly drawn clips");
  c_edit->add_option("--target", edit.target, "Target duration in seconds (recorded for eval)");
  c_edit->add_option("--jobs", edit.jobs, "Concurrent episodes")->check(CLI::PositiveNumber);
  c_edit->callback([&] { action = [&] { return cmd_edit(cfg, edit); }; });

  EvalArgs eval;
  auto* c_eval = app.add_subcommand("eval", "Aggregate metrics over run directories");
  c_eval->add_option("runs_dir", eval.runs_dir)->required()->check(CLI::ExistingDirectory);
  c_eval->add_option("--targets", eval.targets, "JSON {run name: target seconds}");
  c_eval->add_option("--out", eval.out, "Report JSON");
  c_eval->add_option("--jobs", eval.jobs)->check(CLI::PositiveNumber);
  c_eval->callback([&] { action = [&] { return cmd_eval(cfg, eval); }; });

  JudgeArgs jd;
  auto* c_judge = app.add_subcommand("judge", "Pairwise timeline preference with a vision model");
  c_judge->add_option("--request", jd.request)->required();
  c_judge->add_option("--timeline-a", jd.timeline_a)->required();
  c_judge->add_option("--timeline-b", jd.timeline_b)->required();
  c_judge->add_option("--collection", jd.collection)->required();
  c_judge->add_option("--media-root", jd.media_root);
  c_judge->add_option("--pair-id", jd.pair_id)->required();
  c_judge->add_option("--verdict-log", jd.verdict_log, "Append the verdict record to this JSONL file");
  c_judge->add_option("--grid-dir", jd.grid_dir, "Save both keyframe grids here");
  c_judge->callback([&] { action = [&] { return cmd_judge(cfg, jd); }; });

  double p = 0.0;
  auto* c_pabak = app.add_subcommand("pabak", "Two-category PABAK of an observed agreement");
  c_pabak->add_option("p", p)->required();
  c_pabak->callback([&] { action = [&] { return cmd_pabak(p); }; });

  AgreementArgs ag;
  auto* c_agree = app.add_subcommand("agreement", "Judge-human and inter-human agreement");
  c_agree->add_option("--votes", ag.votes, "CSV pair_id,voter_id,choice")->required();
  c_agree->add_option("--judge", ag.judge_choices, "CSV pair_id,choice")->required();
  c_agree->add_option("--out", ag.out);
  c_agree->callback([&] { action = [&] { return cmd_agreement(ag); }; });

  RenderArgs rp;
  auto* c_render = app.add_subcommand("render-plan", "Emit the cut list and ffmpeg commands for a timeline");
  c_render->add_option("timeline", rp.timeline)->required();
  c_render->add_option("--out", rp.out);
  c_render->add_option("--media-root", rp.media_root);
  c_render->add_option("--aroll", rp.aroll, "A-roll media file (relative to --media-root)");
  c_render->add_option("--output", rp.output_name);
  c_render->add_flag("--exec", rp.exec, "Run the commands");
  c_render->callback([&] { action = [&] { return cmd_render_plan(cfg, rp); }; });

  std::string search_collection_path;
  std::string query;
  auto* c_search = app.add_subcommand("search", "Query a collection");
  c_search->add_option("--collection", search_collection_path)->required();
  c_search->add_option("query", query)->required();
  c_search->callback([&] { action = [&] { return cmd_search(cfg, search_collection_path, query); }; });

  BaselineArgs bl;
  auto* c_baseline = app.add_subcommand("baseline", "Retrieval-only timeline");
  c_baseline->add_option("--collection", bl.collection)->required();
  c_baseline->add_option("--request", bl.request)->required();
  c_baseline->add_option("--target", bl.target)->required();
  c_baseline->add_option("--out", bl.out);
  c_baseline->callback([&] { action = [&] { return cmd_baseline(cfg, bl); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    return action();
  } catch (const GatewayError& e) {
    std::cerr << "gateway error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return kGatewayFailure;
  } catch (const EmbedderError& e) {
    std::cerr << "embedding error: " << e.what() << '\n';
    return kGatewayFailure;
  } catch (const UnparseableVerdict& e) {
    std::cerr << e.what() << '\n';
    return kEpisodeFailure;
  } catch (const NothingToRender& e) {
    std::cerr << e.what() << '\n';
    return kInputError;
  } catch (const SchemaError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kInputError;
  } catch (const InputError& e) {
    std::cerr << e.what() << '\n';
    return kInputError;
  } catch (const MissingKeyframe& e) {
    std::cerr << e.what() << '\n';
    return kInputError;
  } catch (const InsufficientDemos& e) {
    std::cerr << e.what() << '\n';
    return kInputError;
  } catch (const TimelineError& e) {
    std::cerr << e.what() << '\n';
    return kInputError;
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
