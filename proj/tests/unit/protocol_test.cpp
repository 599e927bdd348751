// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <map>

#include "editduet/hashing.hpp"
#include "editduet/protocol.hpp"
#include "oracles.hpp"

using namespace editduet;
using namespace editduet::testing;

namespace {

Demonstration demo(int i) {
  Demonstration d;
  d.stage = DemoStage::Editor;
  d.label = "demo label " + std::to_string(i);
  d.trajectory = {{{"tool", "remove_from_timeline"}, {"args", {{"k", i}}}}, {{"tool", "DONE"}, {"args", nlohmann::json::object()}}};
  d.initial_view = "(initial " + std::to_string(i) + ")";
  d.final_view = "(final " + std::to_string(i) + ")";
  d.score = 5;
  return d;
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

PromptContext editor_context() {
  PromptContext ctx;
  ctx.collection = &bakery().collection;
  ctx.observation = {"voice over", "collection summary", {}, "(timeline is empty)"};
  ctx.feedback = Feedback{"add dough", 0};
  return ctx;
}

}  // namespace

TEST(Protocol, TemplatesArePinned) {
  const std::map<std::string, std::string> pinned = {
      {"01_editor", "28fb478f17ee52c5adf549934170a09925c5e1d8ce82124aa84417e232b91367"},
      {"02_critic", "032dfe1cdb50976d5b2fa6bf1afa5eec5334d6f9e03ce4285628316b12e361e4"},
      {"03_editor_explorer", "3abd9260673bf6e546b9c7b012e09de5a5707f56e8c488f6e765f2a2e1c4c39b"},
      {"04_editor_labeler", "ad3e8977b89b1dc3af7043a9f402e5db688c74843bd1208560f353405ccfe502"},
      {"05_editor_scorer", "33871bea8f16ee6c57039931dd23862bcba301fcc5fc9f5bb6625b946ec89246"},
      {"06_critic_explorer", "4736a538a5fbe48ad1ca7920e693e6399fbb35568d89f85a9f8b0d81a51e8302"},
      {"07_critic_labeler", "2c5fdd0095069f73297d4ca14d053f878a0f2a3f15a5f3f298d75c858759a956"},
      {"08_critic_scorer", "04ea342e73418edd7e13dd4ae31dfff7112805e2f01144e0b80fc765ecfd0862"},
      {"09_editor_reflector", "92393bf43d7e3146ddec5c1e2fa9ab0bf5f5d66558db1bc3bf41a8fe6acf16c7"},
      {"10_judge", "2edaf4ce1d045ba84310ef63522f9d21329ed649581d817204275f4f5a4f4862"},
  };
  EXPECT_EQ(prompt_template_names().size(), pinned.size());
  for (const auto& [name, digest] : pinned) {
    EXPECT_EQ(sha256_hex(prompt_template(name)), digest) << name;
  }
  EXPECT_THROW(prompt_template("11_missing"), MissingTemplate);
}

TEST(Protocol, RolesMapToTemplatesAndTemperatures) {
  EXPECT_EQ(template_name(PromptRole::Editor), "01_editor");
  EXPECT_EQ(template_name(PromptRole::Judge), "10_judge");
  EXPECT_EQ(default_temperature(PromptRole::EditorExplorer), 0.7);
  EXPECT_EQ(default_temperature(PromptRole::CriticExplorer), 0.7);
  EXPECT_EQ(default_temperature(PromptRole::Editor), 0.0);
  EXPECT_EQ(default_temperature(PromptRole::EditorScorer), 0.0);
  EXPECT_EQ(action_set(PromptRole::Critic), ActionSet::Critic);
  EXPECT_EQ(action_set(PromptRole::EditorExplorer), ActionSet::Editor);
  EXPECT_FALSE(action_set(PromptRole::EditorLabeler));
}

TEST(Protocol, EditorPromptCarriesDemosInOrder) {
  std::vector<Demonstration> demos;
  for (int i = 0; i < 5; ++i) demos.push_back(demo(i));
  const auto msgs = assemble_prompt(PromptRole::Editor, demos, editor_context());
  const std::string& sys = msgs.front().content;
  EXPECT_EQ(count(sys, "### Example "), 5u);
  std::size_t last = 0;
  for (int i = 0; i < 5; ++i) {
    const auto pos = sys.find("demo label " + std::to_string(i));
    ASSERT_NE(pos, std::string::npos);
    EXPECT_GT(pos, last);
    last = pos;
  }
  EXPECT_EQ(sys.find(kExamplesSlot), std::string::npos);
  EXPECT_EQ(sys.find(kFunctionSlot), std::string::npos);
  EXPECT_NE(sys.find("switch_clip_positions"), std::string::npos);
}

TEST(Protocol, ZeroDemosEmptiesTheSlot) {
  const auto msgs = assemble_prompt(PromptRole::Editor, {}, editor_context());
  EXPECT_EQ(msgs.front().content.find(kExamplesSlot), std::string::npos);
  EXPECT_EQ(count(msgs.front().content, "### Example"), 0u);
}

TEST(Protocol, EditorMessageOrder) {
  const auto msgs = assemble_prompt(PromptRole::Editor, {}, editor_context());
  ASSERT_EQ(msgs.size(), 5u);
  EXPECT_EQ(msgs[0].role, "system");
  EXPECT_EQ(msgs[1].content, "Feedback from the critic:\nadd dough");
  EXPECT_EQ(msgs[2].content, "Summary of the video collection:\ncollection summary");
  EXPECT_EQ(msgs[3].content, "Voice-over transcript:\nvoice over");
  EXPECT_EQ(msgs[4].content.rfind("Current timeline:\n(timeline is empty)\n\nSearch panel:\n(no search results)", 0),
            0u);
}

TEST(Protocol, EditorHistoryBecomesTurnPairs) {
  PromptContext ctx = editor_context();
  ctx.editor_history.steps.push_back({ctx.observation, SearchCollection{"dough"}, "Search returned 5 results"});
  ctx.editor_history.steps.push_back({ctx.observation, Done{}, ""});
  const auto msgs = assemble_prompt(PromptRole::Editor, {}, ctx);
  ASSERT_EQ(msgs.size(), 9u);
  EXPECT_EQ(msgs[5].role, "assistant");
  EXPECT_EQ(msgs[5].content, R"({"args":{"query":"dough"},"tool":"search_collection"})");
  EXPECT_EQ(msgs[6].content.rfind("Result of your last action:\nSearch returned 5 results", 0), 0u);
}

TEST(Protocol, CriticPromptSeesRequestNotSearch) {
  PromptContext ctx;
  ctx.request = UserRequest{"a bakery opening"};
  ctx.observation.tau_view = "(timeline is empty)";
  const auto msgs = assemble_prompt(PromptRole::Critic, {}, ctx);
  ASSERT_EQ(msgs.size(), 3u);
  EXPECT_EQ(msgs[1].content, "User request:\na bakery opening");
  EXPECT_EQ(msgs[2].content.find("Search panel"), std::string::npos);
}

TEST(Protocol, CriticExplorerGetsSyntheticLabels) {
  PromptContext ctx;
  ctx.observation.tau_view = "(timeline is empty)";
  ctx.synthetic_labels = {"make it warmer", "open on the street"};
  const auto msgs = assemble_prompt(PromptRole::CriticExplorer, {}, ctx);
  const std::string& sys = msgs.front().content;
  EXPECT_EQ(sys.find(kLabelsSlot), std::string::npos);
  EXPECT_NE(sys.find("- make it warmer\n- open on the street"), std::string::npos);
}

TEST(Protocol, AssemblyIsDeterministic) {
  std::vector<Demonstration> demos = {demo(1), demo(2)};
  for (auto role : {PromptRole::Editor, PromptRole::EditorExplorer, PromptRole::EditorLabeler,
                    PromptRole::EditorScorer, PromptRole::EditorReflector, PromptRole::Critic,
                    PromptRole::CriticExplorer, PromptRole::CriticLabeler, PromptRole::CriticScorer}) {
    PromptContext ctx = editor_context();
    ctx.request = UserRequest{"r"};
    EXPECT_EQ(assemble_prompt(role, demos, ctx), assemble_prompt(role, demos, ctx)) << to_string(role);
  }
  EXPECT_THROW(assemble_prompt(PromptRole::Judge, {}, editor_context()), std::invalid_argument);
}

TEST(Protocol, DemonstrationJsonRoundTrip) {
  const Demonstration d = demo(3);
  const Demonstration back = parse_demonstration(to_json(d));
  EXPECT_EQ(back.label, d.label);
  EXPECT_EQ(back.trajectory, d.trajectory);
  EXPECT_EQ(back.final_view, d.final_view);
  EXPECT_THROW(parse_demonstration(nlohmann::json::object()), SchemaError);
}

TEST(Protocol, CorrectiveMessageNamesTheFailure) {
  const std::string text =
      corrective_message({ParseFailureKind::UnknownFunction, "unknown tool \"combine_clips\"", "combine_clips"},
                         ActionSet::Editor);
  EXPECT_NE(text.find("UnknownFunction"), std::string::npos);
  EXPECT_NE(text.find("move_clip"), std::string::npos);
}
