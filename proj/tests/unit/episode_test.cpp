// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "editduet/episode.hpp"
#include "oracles.hpp"

using namespace editduet;
using namespace editduet::testing;
using nlohmann::json;

namespace {

ScriptEntry reply(json wire) { return {std::nullopt, wire.dump()}; }
ScriptEntry feedback(const std::string& f) { return reply({{"tool", "give_feedback"}, {"args", {{"f", f}}}}); }
ScriptEntry render() { return reply({{"tool", "RENDER"}, {"args", json::object()}}); }
ScriptEntry done() { return reply({{"tool", "DONE"}, {"args", json::object()}}); }
ScriptEntry search(const std::string& q) { return reply({{"tool", "search_collection"}, {"args", {{"query", q}}}}); }
ScriptEntry add(const std::string& v, int k, double s, double e) {
  return reply({{"tool", "add_to_timeline"}, {"args", {{"v", v}, {"k", k}, {"t_s", s}, {"t_e", e}}}});
}

ScriptFixture fixture(std::vector<ScriptEntry> entries) {
  ScriptFixture f;
  f.request = "Hands kneading dough, about 10 seconds.";
  f.target_s = 10.0;
  f.entries = std::move(entries);
  return f;
}

}  // namespace

TEST(Episode, GoldenRunIsByteIdentical) {
  const auto dir = data_dir() / "golden";
  const auto f = load_fixture(dir / "script.json");
  for (int run = 0; run < 2; ++run) {
    TempDir out("golden");
    const auto r = run_fixture(f, {}, out.path());
    EXPECT_EQ(r.result.status, EpisodeStatus::Rendered);
    EXPECT_EQ(r.result.critic_rounds, 2u);
    EXPECT_EQ(r.result.editor_steps, 5u);
    EXPECT_EQ(r.remaining, 0u);
    EXPECT_EQ(read_file(out.path() / "timeline.json"), read_file(dir / "timeline.json"));
    EXPECT_EQ(read_file(out.path() / "episode.jsonl"), read_file(dir / "episode.jsonl"));
    EXPECT_EQ(read_file(out.path() / "result.json"), read_file(dir / "result.json"));
  }
}

TEST(Episode, FailureTaxonomyFixtures) {
  for (const char* name : {"unknown_function", "unknown_file", "bad_index", "out_of_bounds", "unparseable"}) {
    SCOPED_TRACE(name);
    const auto f = load_fixture(data_dir() / "failures" / (std::string(name) + ".json"));
    TempDir out(name);
    const auto r = run_fixture(f, {}, out.path());
    ASSERT_EQ(r.result.status, EpisodeStatus::Failed);
    ASSERT_TRUE(r.result.failure_kind);
    EXPECT_EQ(to_string(*r.result.failure_kind), *f.expected_failure);
    EXPECT_EQ(r.result.final_timeline.size(), *f.expected_clips);
    const auto loaded = load_episode_result(out.path());
    EXPECT_EQ(loaded.failure_kind, r.result.failure_kind);
    EXPECT_EQ(loaded.final_timeline.clips, r.result.final_timeline.clips);
  }
}

TEST(Episode, RoundOfSearchAddDone) {
  const auto r = run_fixture(
      fixture({feedback("add dough"), search("dough"), add("kneading.mp4", 0, 0, 8), done(), render()}));
  EXPECT_EQ(r.result.status, EpisodeStatus::Rendered);
  EXPECT_EQ(r.result.final_timeline.size(), 1u);
  EXPECT_EQ(r.trace.editor_history.steps.size(), 3u);
  EXPECT_EQ(r.trace.critic_history.steps.size(), 2u);
  // Search refreshes the panel seen by the next step.
  EXPECT_TRUE(r.trace.editor_history.steps[0].observation.o_search.empty());
  EXPECT_EQ(r.trace.editor_history.steps[1].observation.o_search.size(), 5u);
}

TEST(Episode, ImmediateRenderOnPreparedTimeline) {
  const auto& corpus = bakery();
  ScriptedGateway gateway({render()});
  EpisodeInputs in;
  in.collection = &corpus.collection;
  in.embedder = &corpus.embedder;
  in.request = {"keep it"};
  in.initial_timeline = add_to_timeline({}, "oven.mp4", 0, 0, 10, corpus.collection);
  const auto r = run_episode(in, gateway, {});
  EXPECT_EQ(r.status, EpisodeStatus::Rendered);
  EXPECT_EQ(r.critic_rounds, 1u);
  EXPECT_EQ(r.editor_steps, 0u);
  EXPECT_EQ(r.final_timeline.size(), 1u);
  EXPECT_FALSE(r.failure_kind);
}

TEST(Episode, HallucinatedFunctionAfterRetries) {
  const auto bad = reply({{"tool", "combine_clips"}, {"args", json::object()}});
  const auto r = run_fixture(fixture({feedback("add dough"), bad, bad, bad}));
  EXPECT_EQ(r.result.failure_kind, FailureKind::FunctionHallucination);
  EXPECT_EQ(r.consumed, 4u);
}

TEST(Episode, RetryRecoversFromBadReply) {
  const auto r = run_fixture(fixture({feedback("add dough"), {std::nullopt, "Let me think."}, done(), render()}));
  EXPECT_EQ(r.result.status, EpisodeStatus::Rendered);
  // The corrective message is appended to the retried prompt.
  ScriptedGateway g(fixture({feedback("x"), {std::nullopt, "nope"}, done(), render()}).entries);
  const auto& corpus = bakery();
  EpisodeInputs in;
  in.collection = &corpus.collection;
  in.embedder = &corpus.embedder;
  in.request = {"r"};
  run_episode(in, g, {});
  const auto reqs = g.requests();
  ASSERT_EQ(reqs.size(), 4u);
  EXPECT_EQ(reqs[2].messages.size(), reqs[1].messages.size() + 2);
  EXPECT_EQ(reqs[2].messages[reqs[2].messages.size() - 2].content, "nope");
  EXPECT_NE(reqs[2].messages.back().content.find("NotParseable"), std::string::npos);
}

TEST(Episode, EmptyFeedbackIsUnparseable) {
  const auto empty = feedback("");
  const auto r = run_fixture(fixture({empty, empty, empty}));
  EXPECT_EQ(r.result.failure_kind, FailureKind::UnparseableOutput);
  EXPECT_EQ(r.result.critic_rounds, 0u);
}

TEST(Episode, EditorStepCap) {
  EpisodeConfig config;
  config.max_editor_steps_per_round = 4;
  std::vector<ScriptEntry> entries = {feedback("search")};
  for (int i = 0; i < 4; ++i) entries.push_back(search("dough"));
  const auto r = run_fixture(fixture(entries), config);
  EXPECT_EQ(r.result.failure_kind, FailureKind::BudgetExhausted);
  EXPECT_EQ(r.result.editor_steps, 4u);
}

TEST(Episode, DoneCountsAsAStep) {
  EpisodeConfig config;
  config.max_editor_steps_per_round = 2;
  const auto r = run_fixture(fixture({feedback("x"), search("dough"), done(), render()}), config);
  EXPECT_EQ(r.result.status, EpisodeStatus::Rendered);
  EXPECT_EQ(r.result.editor_steps, 2u);
}

TEST(Episode, CriticRoundCap) {
  EpisodeConfig config;
  config.max_critic_rounds = 2;
  const auto r = run_fixture(fixture({feedback("a"), done(), feedback("b"), done()}), config);
  EXPECT_EQ(r.result.failure_kind, FailureKind::BudgetExhausted);
  EXPECT_EQ(r.result.critic_rounds, 2u);
  EXPECT_EQ(r.remaining, 0u);
}

TEST(Episode, LenientModeFeedsErrorsBack) {
  EpisodeConfig config;
  config.strict_failures = false;
  const auto r = run_fixture(
      fixture({feedback("x"), add("ghost.mp4", 0, 0, 1), add("kneading.mp4", 0, 0, 8), done(), render()}), config);
  EXPECT_EQ(r.result.status, EpisodeStatus::Rendered);
  EXPECT_EQ(r.result.final_timeline.size(), 1u);
  EXPECT_EQ(r.trace.editor_history.steps[0].outcome.rfind("Error (FileHallucination)", 0), 0u);
}

TEST(Episode, GatewayFailureIsClassified) {
  const auto r = run_fixture(fixture({feedback("x")}));
  EXPECT_EQ(r.result.failure_kind, FailureKind::GatewayFailure);
}

TEST(Episode, RejectsEmptyRequestAndZeroCaps) {
  const auto& corpus = bakery();
  ScriptedGateway g({});
  EpisodeInputs in;
  in.collection = &corpus.collection;
  in.embedder = &corpus.embedder;
  in.request = {"   "};
  EXPECT_THROW(run_episode(in, g, {}), std::invalid_argument);
  EpisodeConfig zero;
  zero.max_critic_rounds = 0;
  EXPECT_THROW(zero.validate(), std::invalid_argument);
}

TEST(Episode, StatusAndFailureKindAgree) {
  for (const auto& f : {fixture({render()}), fixture({feedback("x")})}) {
    const auto r = run_fixture(f);
    EXPECT_EQ(r.result.status == EpisodeStatus::Failed, r.result.failure_kind.has_value());
    const json j = to_json(r.result);
    EXPECT_EQ(j["failure_kind"].is_null(), r.result.status == EpisodeStatus::Rendered);
  }
}

TEST(Episode, LogRecordsCarryMonotonicCounter) {
  const auto r = run_fixture(fixture({feedback("x"), search("dough"), done(), render()}));
  const auto& records = r.trace.log.records();
  ASSERT_FALSE(records.empty());
  for (std::size_t i = 0; i < records.size(); ++i) {
    EXPECT_EQ(records[i]["t"], i);
    EXPECT_TRUE(records[i].contains("actor") && records[i].contains("event") && records[i].contains("payload"));
  }
  EXPECT_EQ(parse_failure_kind("IndexError"), FailureKind::IndexError);
  EXPECT_EQ(failure_kind_for(TimelineErrorKind::InvertedRange), FailureKind::OutOfBoundsSubclip);
}
