#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "fake_chat.hpp"
#include "test_support.hpp"
#include "warnbench/error.hpp"
#include "warnbench/generators.hpp"
#include "warnbench/validation.hpp"

using namespace warnbench;

namespace {

Verdict verdict_for(const TestInput& t, int score) {
  return Verdict::from_score(score, t.target_warning_id.value_or(""), "test", "");
}

// Drives a generator the way the pipeline does and returns the inputs.
std::vector<TestInput> drive(TestGenerator& g, const Manual& m, std::size_t steps,
                             std::uint64_t seed, int score = 1) {
  GeneratorContext ctx{m, {}, seed};
  std::vector<TestInput> out;
  for (std::size_t i = 0; i < steps; ++i) {
    auto t = g.generate(ctx);
    auto v = verdict_for(t, score);
    ctx.history.push_back({t, {}, v});
    g.update_state(ctx, t, v);
    out.push_back(t);
  }
  return out;
}

}  // namespace

TEST(TestInput, JsonRoundTrip) {
  TestInput t{"t1", "hi", "w1", "random", 4};
  auto back = test_input_from_json(test_input_to_json(t));
  EXPECT_EQ(back.id, "t1");
  EXPECT_EQ(back.target_warning_id, "w1");
  EXPECT_EQ(back.created_at, 4u);
  t.target_warning_id.reset();
  auto j = test_input_to_json(t);
  EXPECT_TRUE(j["target_warning_id"].is_null());
  EXPECT_FALSE(test_input_from_json(j).target_warning_id);
}

TEST(SelectWarning, FollowsWeights) {
  WarningWeights w{{"a", 1.0}, {"b", 3.0}, {"c", 0.0}};
  Rng rng(5);
  std::map<std::string, int> counts;
  for (int i = 0; i < 40000; ++i) ++counts[select_warning(w, rng)];
  EXPECT_EQ(counts["c"], 0);
  EXPECT_NEAR(counts["b"] / 40000.0, 0.75, 0.01);
  EXPECT_THROW(select_warning({{"a", 0.0}}, rng), PreconditionError);
  EXPECT_THROW(select_warning({{"a", -1.0}, {"b", 2.0}}, rng), PreconditionError);
  EXPECT_THROW(select_warning({}, rng), PreconditionError);
}

TEST(Perturbation, ApplyInsertAndDelete) {
  EXPECT_EQ(apply_perturbation("a b c", {PerturbKind::InsertFiller, 0, "uh"}), "uh a b c");
  EXPECT_EQ(apply_perturbation("a b c", {PerturbKind::InsertFiller, 3, "hm"}), "a b c hm");
  EXPECT_EQ(apply_perturbation("a b c", {PerturbKind::DeleteWord, 2, ""}), "a b");
  EXPECT_EQ(apply_perturbation("", {PerturbKind::InsertFiller, 0, "um"}), "um");
  EXPECT_THROW(apply_perturbation("a b", {PerturbKind::DeleteWord, 0, ""}), PreconditionError);
  EXPECT_THROW(apply_perturbation("a", {PerturbKind::DeleteWord, 1, ""}), PreconditionError);
  EXPECT_THROW(apply_perturbation("a", {PerturbKind::InsertFiller, 2, "uh"}), PreconditionError);
  EXPECT_THROW(apply_perturbation("a", {PerturbKind::InsertFiller, 0, "erm"}), PreconditionError);
}

TEST(Perturbation, SingleWordOnlyGetsFillers) {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    auto out = perturb("Hello", rng);
    auto words = text::split_whitespace(out);
    ASSERT_EQ(words.size(), 2u);
    EXPECT_TRUE(std::find(words.begin(), words.end(), "Hello") != words.end());
  }
}

TEST(Perturbation, KeepsFirstWordOnDeletion) {
  Rng rng(9);
  for (int i = 0; i < 500; ++i) {
    auto out = perturb("How do I open it", rng);
    auto words = text::split_whitespace(out);
    if (words.size() == 4) EXPECT_EQ(words[0], "How");
  }
}

TEST(TemplateDrafter, MentionsComponentAndKeyword) {
  const auto& m = wbtest::sample_manual();
  TemplateDrafter d;
  Rng rng(1);
  for (const auto& sw : all_warnings(m)) {
    const Warning* ws[] = {sw.warning};
    auto u = d.draft(*sw.section, ws, rng);
    EXPECT_NE(u.find(component_phrase(*sw.section)), std::string::npos) << u;
    bool has_kw = std::any_of(sw.warning->keywords.begin(), sw.warning->keywords.end(),
                              [&](const std::string& k) { return u.find(k) != std::string::npos; });
    EXPECT_TRUE(has_kw) << u;
    EXPECT_EQ(u.back(), '?');
  }
}

TEST(LlmDrafter, UsesFirstNonEmptyLineUnquoted) {
  auto chat = std::make_shared<wbtest::ScriptedChat>(
      std::vector<std::string>{"\n  \"Is the trunk safe with fumes?\"\nextra"});
  LlmDrafter d(chat);
  const auto& m = wbtest::sample_manual();
  Rng rng(1);
  const Warning* ws[] = {find_warning(m, "w-trunk-exhaust")};
  EXPECT_EQ(d.draft(*find_section_of(m, "w-trunk-exhaust"), ws, rng),
            "Is the trunk safe with fumes?");
  EXPECT_THROW(LlmDrafter(nullptr), PreconditionError);
}

TEST(Generators, TemplateOutputPassesShippedDictionary) {
  const auto& m = wbtest::sample_manual();
  auto dict = Dictionary::load(wbtest::wordlist_path());
  for (const auto& v : template_vocabulary()) EXPECT_TRUE(dict.contains(v)) << v;
  for (const auto& name : {"random", "atlas-like", "exida-like", "warnless-like", "crisp-like"}) {
    auto g = make_generator(name, nlohmann::json::object(), {});
    for (const auto& t : drive(*g, m, 200, 77)) {
      EXPECT_TRUE(check_english(t.utterance, dict).empty()) << name << ": " << t.utterance;
      EXPECT_TRUE(check_length(t.utterance)) << name << ": " << t.utterance;
      ASSERT_TRUE(t.target_warning_id);
      EXPECT_NE(find_warning(m, *t.target_warning_id), nullptr);
      EXPECT_EQ(t.generator_name, name);
    }
  }
}

TEST(Generators, GenerateIsPureWithoutUpdate) {
  const auto& m = wbtest::sample_manual();
  for (const auto& name : registered_generators()) {
    auto g = make_generator(name, nlohmann::json::object(), {});
    GeneratorContext ctx{m, {}, 5};
    auto a = g->generate(ctx);
    auto b = g->generate(ctx);
    EXPECT_EQ(a.utterance, b.utterance) << name;
  }
}

TEST(Generators, SameSeedSameSequence) {
  const auto& m = wbtest::sample_manual();
  for (const auto& name : registered_generators()) {
    auto g1 = make_generator(name, nlohmann::json::object(), {});
    auto g2 = make_generator(name, nlohmann::json::object(), {});
    auto a = drive(*g1, m, 50, 123);
    auto b = drive(*g2, m, 50, 123);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].utterance, b[i].utterance) << name;
  }
}

TEST(RandomGenerator, CoversEveryWarning) {
  const auto& m = wbtest::sample_manual();
  RandomGenerator g;
  std::set<std::string> seen;
  for (const auto& t : drive(g, m, 300, 1)) seen.insert(*t.target_warning_id);
  EXPECT_EQ(seen.size(), total_warnings(m));
}

TEST(AtlasLike, ExploresBeforeRepeating) {
  const auto& m = wbtest::sample_manual();
  AtlasLikeGenerator g;
  auto inputs = drive(g, m, 27, 4);
  const std::size_t n = total_warnings(m);
  for (std::size_t round = 0; round < 3; ++round) {
    std::set<std::string> ids;
    for (std::size_t i = round * n; i < (round + 1) * n; ++i) ids.insert(*inputs[i].target_warning_id);
    EXPECT_EQ(ids.size(), n) << "round " << round;
  }
  EXPECT_EQ(g.selections("w-acc-weather"), 3u);
  EXPECT_DOUBLE_EQ(g.priority("w-acc-weather"), 0.125);
  EXPECT_DOUBLE_EQ(g.priority("unknown"), 1.0);
}

TEST(AtlasLike, RejectedInputsStillCountAsSelections) {
  const auto& m = wbtest::sample_manual();
  AtlasLikeGenerator g;
  GeneratorContext ctx{m, {}, 0};
  auto t = g.generate(ctx);
  g.update_state(ctx, t, std::nullopt);
  EXPECT_EQ(g.selections(*t.target_warning_id), 1u);
}

TEST(AtlasLike, SettingsAreValidated) {
  EXPECT_THROW(AtlasLikeGenerator({1.0, 0.5}), PreconditionError);
  EXPECT_THROW(AtlasLikeGenerator({0.5, 1.5}), PreconditionError);
  auto g = make_generator("atlas-like", {{"decay", 0.25}}, {});
  EXPECT_EQ(g->name(), "atlas-like");
}

TEST(ExidaLike, DiversityBoundRespectedWhenAchievable) {
  const auto& m = wbtest::sample_manual();
  ExidaLikeGenerator g({0.6, 20});
  GeneratorContext ctx{m, {}, 8};
  std::size_t over = 0;
  for (int i = 0; i < 60; ++i) {
    auto t = g.generate(ctx);
    if (ExidaLikeGenerator::max_similarity(t.utterance, ctx) > 0.6) ++over;
    ctx.history.push_back({t, {}, std::nullopt});
  }
  EXPECT_LE(over, 6u);
}

TEST(ExidaLike, MaxSimilarity) {
  const auto& m = wbtest::sample_manual();
  GeneratorContext ctx{m, {}, 0};
  EXPECT_EQ(ExidaLikeGenerator::max_similarity("a b", ctx), 0.0);
  ctx.history.push_back({{"t0", "a b c d", {}, "x", 0}, {}, std::nullopt});
  EXPECT_DOUBLE_EQ(ExidaLikeGenerator::max_similarity("a b", ctx), 0.5);
}

TEST(WarnlessLike, WeightFormula) {
  WarnlessLikeGenerator g;
  EXPECT_DOUBLE_EQ(g.weight("w"), 0.05 + 0.5);
  const auto& m = wbtest::sample_manual();
  GeneratorContext ctx{m, {}, 0};
  TestInput t{"t", "u", "w-acc-weather", "warnless-like", 0};
  g.update_state(ctx, t, verdict_for(t, 0));
  EXPECT_DOUBLE_EQ(g.weight("w-acc-weather"), 0.05 + 2.0 / 3.0);
  g.update_state(ctx, t, verdict_for(t, 1));
  EXPECT_DOUBLE_EQ(g.weight("w-acc-weather"), 0.05 + 2.0 / 4.0);
  g.update_state(ctx, t, std::nullopt);
  EXPECT_DOUBLE_EQ(g.weight("w-acc-weather"), 0.05 + 2.0 / 4.0);
  EXPECT_EQ(g.weights(m).size(), total_warnings(m));
}

TEST(WarnlessLike, ConcentratesOnFailingWarnings) {
  const auto& m = wbtest::sample_manual();
  WarnlessLikeGenerator g;
  GeneratorContext ctx{m, {}, 3};
  std::map<std::string, int> picks;
  for (int i = 0; i < 600; ++i) {
    auto t = g.generate(ctx);
    int score = *t.target_warning_id == "w-doors-cyclists" ? 0 : 1;
    auto v = verdict_for(t, score);
    ctx.history.push_back({t, {}, v});
    g.update_state(ctx, t, v);
    if (i >= 300) ++picks[*t.target_warning_id];
  }
  for (const auto& [id, c] : picks) {
    if (id != "w-doors-cyclists") EXPECT_GT(picks["w-doors-cyclists"], c) << id;
  }
}

TEST(CrispLike, ShortAndGrounded) {
  const auto& m = wbtest::sample_manual();
  CrispLikeGenerator g;
  for (const auto& t : drive(g, m, 200, 6)) {
    EXPECT_LE(text::word_count(t.utterance), kCrispMaxWords) << t.utterance;
    bool has_context = false;
    for (auto c : CrispLikeGenerator::risk_contexts()) {
      has_context = has_context || t.utterance.find(c) != std::string::npos;
    }
    EXPECT_TRUE(has_context || text::word_count(t.utterance) == kCrispMaxWords) << t.utterance;
  }
}

TEST(CrispLike, NavigatePrefersOverlappingContext) {
  Warning w{"w", "Do not use this in heavy rain or fog", {"rain"}};
  Rng rng(0);
  EXPECT_EQ(CrispLikeGenerator::navigate(w, rng), "in heavy rain");
}

TEST(Registry, BuiltinsAndCustomRegistration) {
  auto names = registered_generators();
  for (auto n : {"random", "atlas-like", "exida-like", "warnless-like", "crisp-like"}) {
    EXPECT_TRUE(std::find(names.begin(), names.end(), n) != names.end()) << n;
  }
  EXPECT_FALSE(has_generator("mine"));
  register_generator("mine", [](const nlohmann::json&, const GeneratorServices&) {
    return std::make_unique<CrispLikeGenerator>();
  });
  EXPECT_TRUE(has_generator("mine"));
  EXPECT_THROW(make_generator("nope", {}, {}), PreconditionError);
  EXPECT_THROW(register_generator("", nullptr), PreconditionError);
}

TEST(Registry, LlmServiceIsUsedUnlessDisabled) {
  auto chat = std::make_shared<wbtest::ScriptedChat>(std::vector<std::string>{"Custom question?"});
  const auto& m = wbtest::sample_manual();
  GeneratorContext ctx{m, {}, 0};
  auto with = make_generator("random", nlohmann::json::object(), {chat});
  EXPECT_EQ(with->generate(ctx).utterance, "Custom question?");
  auto without = make_generator("random", {{"use_llm", false}}, {chat});
  EXPECT_NE(without->generate(ctx).utterance, "Custom question?");
}
