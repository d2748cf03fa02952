// Copyright 2026 The relassess Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "relassess/errors.hpp"
#include "relassess/prompts.hpp"
#include "test_support.hpp"

namespace relassess {
namespace {

using testing::TempDir;

TEST(RenderSlots, ReplacesEveryOccurrence) {
    EXPECT_EQ(render_slots("{{a}} and {{ a }} then {{b}}", {{"a", "x"}, {"b", "y"}}, "t"), "x and x then y");
    EXPECT_EQ(render_slots("no slots", {}, "t"), "no slots");
}

TEST(RenderSlots, UnknownOrUnterminatedSlotIsConfigError) {
    EXPECT_THROW(render_slots("{{missing}}", {}, "t"), ConfigError);
    EXPECT_THROW(render_slots("{{open", {{"open", "x"}}, "t"), ConfigError);
}

TEST(RenderSlots, ValuesAreNotReexpanded) {
    EXPECT_EQ(render_slots("{{a}}", {{"a", "{{b}}"}}, "t"), "{{b}}");
}

TEST(PromptTemplateTest, SplitsSystemAndUser) {
    const PromptTemplate t("judgment.en.txt", "You judge.\n=== user ===\nQuery: {{q}}\n", "v1");
    const auto r = t.render({{"q", "black sneakers"}});
    EXPECT_EQ(r.system, "You judge.");
    EXPECT_EQ(r.user, "Query: black sneakers");
}

TEST(PromptLibraryTest, FallsBackToEnglishAndVersionsByContent) {
    TempDir dir;
    testing::write_file(dir / "judgment.en.txt", "S {{few_shot_examples}}\n=== user ===\nU {{q}}");
    testing::write_file(dir / "few_shot.json", R"({"examples":[{"query":"nike red shoes","label":"highly_relevant"}]})");
    PromptLibrary lib(dir.path());
    const auto& en = lib.get("judgment", "en");
    const auto& de = lib.get("judgment", "de");
    EXPECT_EQ(en.version(), de.version());
    EXPECT_NE(lib.few_shot_text().find("nike red shoes"), std::string::npos);

    // Changing the few-shot file changes the version of templates that embed it.
    testing::write_file(dir / "few_shot.json", R"({"examples":[{"query":"levi's jeans","label":"irrelevant"}]})");
    PromptLibrary changed(dir.path());
    EXPECT_NE(changed.get("judgment", "en").version(), en.version());
}

TEST(PromptLibraryTest, MissingDirectoryOrTemplate) {
    EXPECT_THROW(PromptLibrary("/nonexistent/prompts"), ConfigError);
    TempDir dir;
    PromptLibrary lib(dir.path());
    EXPECT_THROW(lib.get("judgment", "en"), ConfigError);
}

TEST(PromptLibraryTest, BundledTemplatesRender) {
    PromptLibrary lib(testing::source_dir() / "prompts");
    const std::map<std::string, std::string> analysis{{"query_text", "black sneakers"}, {"language", "en"},
                                                      {"market", "UK"}, {"gender_filter", "none"},
                                                      {"few_shot_examples", lib.few_shot_text()}};
    for (const char* lang : {"en", "de"}) {
        const auto r = lib.get("query_analysis", lang).render(analysis);
        EXPECT_NE(r.user.find("black sneakers"), std::string::npos);
        EXPECT_FALSE(r.system.empty());
    }
}

}  // namespace
}  // namespace relassess
