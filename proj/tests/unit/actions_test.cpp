// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include <nlohmann/json.hpp>

#include "editduet/actions.hpp"

using namespace editduet;
using nlohmann::json;

namespace {

template <typename A>
ParseFailureKind failure(const ParseResult<A>& r) {
  const auto* f = std::get_if<ParseFailure>(&r);
  if (f == nullptr) {
    ADD_FAILURE() << "parsed unexpectedly";
    return ParseFailureKind::NotParseable;
  }
  return f->kind;
}

EditorAction random_editor_action(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> which(0, 5);
  std::uniform_int_distribution<std::int64_t> idx(-3, 40);
  std::uniform_real_distribution<double> sec(0.0, 300.0);
  const std::string words[] = {"dough", "oven \"door\"", "street\nat dawn", "flour", "ünïcode ☕"};
  switch (which(rng)) {
    case 0: return SearchCollection{words[rng() % 5]};
    case 1: return AddToTimeline{words[rng() % 5] + ".mp4", idx(rng), sec(rng), sec(rng)};
    case 2: return RemoveFromTimeline{idx(rng)};
    case 3: return SwitchClipPositions{idx(rng), idx(rng)};
    case 4: return MoveClip{idx(rng), idx(rng)};
    default: return Done{};
  }
}

}  // namespace

TEST(Actions, EditorRoundTrip) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 2000; ++i) {
    const EditorAction a = random_editor_action(rng);
    const auto parsed = parse_editor_action(serialize_action(a));
    ASSERT_TRUE(std::holds_alternative<EditorAction>(parsed)) << serialize_action(a);
    EXPECT_EQ(std::get<EditorAction>(parsed), a);
  }
}

TEST(Actions, CriticRoundTrip) {
  for (const CriticAction& a : {CriticAction{GiveFeedback{"add close-ups of dough"}}, CriticAction{Render{}}}) {
    const auto parsed = parse_critic_action(serialize_action(a));
    ASSERT_TRUE(std::holds_alternative<CriticAction>(parsed));
    EXPECT_EQ(std::get<CriticAction>(parsed), a);
  }
}

TEST(Actions, WireForm) {
  EXPECT_EQ(to_json(EditorAction{MoveClip{1, 2}}), json::parse(R"({"tool":"move_clip","args":{"k":1,"l":2}})"));
  EXPECT_EQ(to_json(EditorAction{Done{}}), json::parse(R"({"tool":"DONE","args":{}})"));
  EXPECT_EQ(tool_name(CriticAction{Render{}}), "RENDER");
  EXPECT_EQ(tool_name(EditorAction{AddToTimeline{}}), "add_to_timeline");
}

TEST(Actions, AcceptsCodeFenceAndIntegralFloats) {
  const auto r = parse_editor_action("```json\n{\"tool\": \"remove_from_timeline\", \"args\": {\"k\": 2}}\n```");
  ASSERT_TRUE(std::holds_alternative<EditorAction>(r));
  EXPECT_EQ(std::get<EditorAction>(r), EditorAction{RemoveFromTimeline{2}});
  const auto add = parse_editor_action(R"({"tool":"add_to_timeline","args":{"v":"a.mp4","k":0,"t_s":1,"t_e":2}})");
  ASSERT_TRUE(std::holds_alternative<EditorAction>(add));
  EXPECT_DOUBLE_EQ(std::get<AddToTimeline>(std::get<EditorAction>(add)).t_e, 2.0);
}

TEST(Actions, FailureKinds) {
  EXPECT_EQ(failure(parse_editor_action(R"({"tool":"combine_clips","args":{}})")),
            ParseFailureKind::UnknownFunction);
  EXPECT_EQ(failure(parse_editor_action(R"({"tool":"RENDER","args":{}})")), ParseFailureKind::UnknownFunction);
  EXPECT_EQ(failure(parse_critic_action(R"({"tool":"DONE","args":{}})")), ParseFailureKind::UnknownFunction);
  EXPECT_EQ(failure(parse_editor_action(R"({"tool":"move_clip","args":{"k":1}})")), ParseFailureKind::BadArity);
  EXPECT_EQ(failure(parse_editor_action(R"({"tool":"remove_from_timeline","args":{"k":1,"x":2}})")),
            ParseFailureKind::BadArity);
  EXPECT_EQ(failure(parse_editor_action(R"({"tool":"remove_from_timeline","args":{"k":"1"}})")),
            ParseFailureKind::BadType);
  EXPECT_EQ(failure(parse_editor_action(R"({"tool":"remove_from_timeline","args":{"k":1.5}})")),
            ParseFailureKind::BadType);
  EXPECT_EQ(failure(parse_editor_action(R"({"tool":"search_collection","args":{"query":"  "}})")),
            ParseFailureKind::BadType);
  EXPECT_EQ(failure(parse_critic_action(R"({"tool":"give_feedback","args":{"f":""}})")), ParseFailureKind::BadType);
  EXPECT_EQ(failure(parse_editor_action("I think we should add the oven shot.")), ParseFailureKind::NotParseable);
  EXPECT_EQ(failure(parse_editor_action(R"({"tool":"DONE","args":{},"why":"x"})")), ParseFailureKind::NotParseable);
  EXPECT_EQ(failure(parse_editor_action(R"(["DONE"])")), ParseFailureKind::NotParseable);
  const auto r = parse_editor_action(R"({"tool":"combine_clips","args":{}})");
  EXPECT_EQ(std::get<ParseFailure>(r).tool, "combine_clips");
}

TEST(Actions, SchemaHasOneVariantPerTool) {
  const json editor = action_schema(ActionSet::Editor);
  ASSERT_TRUE(editor.contains("anyOf"));
  EXPECT_EQ(editor["anyOf"].size(), 6u);
  EXPECT_EQ(action_schema(ActionSet::Critic)["anyOf"].size(), 2u);
  for (const auto& v : editor["anyOf"]) {
    EXPECT_EQ(v["additionalProperties"], false);
    EXPECT_EQ(v["properties"]["tool"]["enum"].size(), 1u);
  }
}

TEST(Actions, ToolDefinitionsMentionEveryEditorTool) {
  const std::string defs = editor_tool_definitions();
  for (const char* name :
       {"search_collection", "add_to_timeline", "remove_from_timeline", "switch_clip_positions", "move_clip", "DONE"}) {
    EXPECT_NE(defs.find(name), std::string::npos) << name;
  }
}
