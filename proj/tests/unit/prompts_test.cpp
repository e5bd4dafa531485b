#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "evn/core/error.hpp"
#include "evn/gateway/prompts.hpp"
#include "test_support.hpp"

namespace evn::gateway {
namespace {

Bindings fixture_bindings(TemplateId id) {
    const auto& t = get_template(id);
    Bindings b;
    for (const auto& name : placeholders(t.system_text + "\n" + t.user_text + "\n" + t.followup_text))
        b[name] = "<<" + name + ">>";
    return b;
}

std::string frozen_form(TemplateId id) {
    const auto b = fixture_bindings(id);
    std::string out;
    for (const auto& m : render(id, b)) out += std::string("[") + to_string(m.role) + "]\n" + m.content + "\n";
    if (!get_template(id).followup_text.empty())
        out += std::string("[followup]\n") + render_followup(id, b).content + "\n";
    return out;
}

TEST(Prompts, GoldenRenders) {
    const bool update = std::getenv("EVN_UPDATE_GOLDEN") != nullptr;
    for (auto id : kAllTemplates) {
        const auto path = std::filesystem::path(EVN_GOLDEN_DIR) / (std::string(to_string(id)) + ".txt");
        const auto rendered = frozen_form(id);
        if (update) {
            std::ofstream(path, std::ios::binary) << rendered;
            continue;
        }
        ASSERT_TRUE(std::filesystem::exists(path)) << path;
        EXPECT_EQ(rendered, testing::read_file(path)) << to_string(id);
    }
}

TEST(Prompts, MissingBindingNamesFirstPlaceholder) {
    try {
        (void)render(TemplateId::ElicitTurnN, {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MissingBinding);
        EXPECT_EQ(e.details().at("binding"), "topic");
    }
}

TEST(Prompts, UnknownTemplateName) {
    try {
        (void)template_id_from_string("nope");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnknownTemplate);
    }
}

TEST(Prompts, TurnZeroSubstitution) {
    const auto msgs = render(TemplateId::ElicitTurn0, {{"user_input", "X-IDEA"}, {"topic", "t"}});
    ASSERT_EQ(msgs.size(), 2u);
    EXPECT_EQ(msgs[0].role, Role::System);
    EXPECT_NE(msgs[0].content.find("friction-inducing"), std::string::npos);
    EXPECT_NE(msgs[1].content.find("X-IDEA"), std::string::npos);
}

TEST(Prompts, JudgeCarriesBothPayloads) {
    const auto msgs = render(TemplateId::Judge, {{"proposal_md", "PROPOSAL-X"}, {"state_json", "{\"s\":1}"}});
    std::string all;
    for (const auto& m : msgs) all += m.content;
    EXPECT_NE(all.find("PROPOSAL-X"), std::string::npos);
    EXPECT_NE(all.find("{\"s\":1}"), std::string::npos);
}

TEST(Prompts, SubstitutionIsVerbatimAndSinglePass) {
    // Binding values that look like placeholders are not expanded again.
    EXPECT_EQ(substitute("a {x} b {y}", {{"x", "{y}"}, {"y", "$1\\n"}}), "a {y} b $1\\n");
    // JSON braces are left alone.
    EXPECT_EQ(substitute("{\"k\": 1} {x}", {{"x", "v"}}), "{\"k\": 1} v");
}

TEST(Prompts, ShippedTextContainsKeyPhrases) {
    auto text = [](TemplateId id) {
        const auto& t = get_template(id);
        return t.system_text + "\n" + t.user_text;
    };
    EXPECT_NE(text(TemplateId::ElicitTurn0).find("Ask concrete, friction-inducing questions"), std::string::npos);
    EXPECT_NE(text(TemplateId::ElicitTurnN).find("Ask concrete, friction-inducing questions"), std::string::npos);
    EXPECT_NE(text(TemplateId::AssumptionBreak).find("List 3--5 implicit assumptions"), std::string::npos);
    EXPECT_NE(text(TemplateId::TraceBuild).find("the method must feel inevitable"), std::string::npos);
    EXPECT_NE(text(TemplateId::NecessityCheck).find("Run five tests"), std::string::npos);
    EXPECT_NE(text(TemplateId::Judge).find("tough but fair paper reviewer"), std::string::npos);
    EXPECT_NE(text(TemplateId::BaselineTurn1).find("convert a rough intuition into a technically credible"),
              std::string::npos);
}

TEST(Prompts, EveryTemplateHasUserText) {
    for (auto id : kAllTemplates) EXPECT_FALSE(get_template(id).user_text.empty()) << to_string(id);
    EXPECT_FALSE(prompt_version().empty());
    EXPECT_FALSE(prompt_fragment("repair.json").empty());
}

}  // namespace
}  // namespace evn::gateway
