// Copyright 2026 The relassess Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "relassess/model.hpp"
#include "relassess/numeric.hpp"
#include "relassess/serialization.hpp"

namespace relassess {
namespace {

constexpr auto I = RelevanceLabel::irrelevant;
constexpr auto A = RelevanceLabel::acceptable_substitute;
constexpr auto H = RelevanceLabel::highly_relevant;

TEST(LabelAlgebra, MajorityOfEqualPrimariesIgnoresTiebreaker) {
    for (auto label : all_values<RelevanceLabel>()) {
        EXPECT_EQ(majority_vote(label, label, std::nullopt), label);
        for (auto tb : all_values<RelevanceLabel>()) EXPECT_EQ(majority_vote(label, label, tb), label);
    }
}

TEST(LabelAlgebra, TiebreakerDecidesDisagreement) {
    EXPECT_EQ(majority_vote(I, H, A), A);
    EXPECT_EQ(majority_vote(I, H, I), I);
    EXPECT_EQ(majority_vote(A, H, H), H);
    EXPECT_THROW(majority_vote(I, A, std::nullopt), UnresolvedVote);
}

TEST(LabelAlgebra, MajorityIsSymmetricInPrimaries) {
    for (auto a : all_values<RelevanceLabel>()) {
        for (auto b : all_values<RelevanceLabel>()) {
            for (auto tb : all_values<RelevanceLabel>()) EXPECT_EQ(majority_vote(a, b, tb), majority_vote(b, a, tb));
        }
    }
}

TEST(LabelAlgebra, HardDisagreementOnlyAtDistanceTwo) {
    for (auto x : all_values<RelevanceLabel>()) {
        for (auto y : all_values<RelevanceLabel>()) {
            EXPECT_EQ(is_hard_disagreement(x, y), label_distance(x, y) == 2);
            EXPECT_EQ(is_hard_disagreement(x, y), is_hard_disagreement(y, x));
        }
    }
    static_assert(is_hard_disagreement(I, H));
    static_assert(!is_hard_disagreement(A, H));
}

TEST(LabelAlgebra, TryMajority) {
    AnnotationSet set{{"q", "p"}, H, H, std::nullopt, {}};
    EXPECT_EQ(try_majority(set), H);
    set.a2 = I;
    EXPECT_EQ(try_majority(set), std::nullopt);
    set.tiebreaker = A;
    EXPECT_EQ(try_majority(set), A);
    set.a1.reset();
    EXPECT_EQ(try_majority(set), std::nullopt);
}

TEST(Enums, RoundTripEveryName) {
    for (auto v : all_values<RelevanceLabel>()) EXPECT_EQ(parse_enum<RelevanceLabel>(to_string(v)), v);
    for (auto v : all_values<Variant>()) EXPECT_EQ(parse_enum<Variant>(to_string(v)), v);
    for (auto v : all_values<Importance>()) EXPECT_EQ(parse_enum<Importance>(to_string(v)), v);
    EXPECT_EQ(to_string(RelevanceLabel::acceptable_substitute), "acceptable_substitute");
    EXPECT_THROW(parse_enum<RelevanceLabel>("Highly_Relevant"), InvalidInput);
    EXPECT_FALSE(try_parse_enum<GenderFilter>("kids").has_value());
}

TEST(Validation, QueryContext) {
    const std::vector<std::string> langs{"en", "de"};
    QueryContext ctx{"q1", "black sneakers", "en", "UK", std::nullopt, "engine-a"};
    EXPECT_NO_THROW(validate(ctx, langs));
    ctx.language = "fr";
    EXPECT_THROW(validate(ctx, langs), InvalidInput);
    ctx.language = "de";
    ctx.query_text = "   ";
    EXPECT_THROW(validate(ctx, langs), InvalidInput);
}

TEST(Validation, AnalysisNeedsRequirements) {
    QueryAnalysis analysis;
    analysis.translated_query = "black sneakers";
    EXPECT_THROW(validate(analysis), InvalidInput);
    analysis.requirements.push_back({"colour", "black", Importance::must_have, ""});
    EXPECT_NO_THROW(validate(analysis));
    analysis.requirements.push_back({"", "x", Importance::nice_to_have, ""});
    EXPECT_THROW(validate(analysis), InvalidInput);
}

TEST(Validation, GuidelineCriteriaNonEmpty) {
    GuidelineSet g;
    g.query_id = "q1";
    g.criteria = {"no", "maybe", "yes"};
    EXPECT_NO_THROW(validate(g));
    g.criteria[1] = "";
    EXPECT_THROW(validate(g), InvalidInput);
    g.criteria[1] = "maybe";
    g.kind = GuidelineKind::generic;
    EXPECT_THROW(validate(g), InvalidInput);
    g.query_id = std::string(kGenericGuidelineId);
    EXPECT_NO_THROW(validate(g));
}

TEST(Validation, TiebreakerOnlyWhenPrimariesDiffer) {
    AnnotationSet set{{"q", "p"}, H, H, A, {}};
    EXPECT_THROW(validate(set), InvalidInput);
    set.a2 = I;
    EXPECT_NO_THROW(validate(set));
    set.a2.reset();
    EXPECT_THROW(validate(set), InvalidInput);
}

TEST(Validation, LlmJudgmentNeedsReasoning) {
    Judgment j;
    j.pair_id = {"q", "p"};
    j.source = LlmSource{"m", Variant::llm_text};
    EXPECT_THROW(validate(j), InvalidInput);
    j.reasoning = "";
    EXPECT_NO_THROW(validate(j));
    j.source = HumanSource{""};
    EXPECT_THROW(validate(j), InvalidInput);
}

TEST(Serialization, CanonicalDumpSortsKeys) {
    const json a = json::parse(R"({"b":1,"a":{"d":2,"c":[3,1]}})");
    const json b = json::parse(R"({"a":{"c":[3,1],"d":2},"b":1})");
    EXPECT_EQ(canonical_dump(a), canonical_dump(b));
    EXPECT_EQ(canonical_dump(a), R"({"a":{"c":[3,1],"d":2},"b":1})");
}

TEST(Serialization, RoundTrips) {
    QueryContext ctx{"q1", "schwarze sneaker", "de", "DE", GenderFilter::women, "engine-b"};
    EXPECT_EQ(json(ctx).get<QueryContext>(), ctx);

    ProductRecord product{"p1", "Sneaker", {{"colour", "black"}, {"brand", "X"}}, "desc", "images/p00.png"};
    const auto back = json(product).get<ProductRecord>();
    EXPECT_EQ(back, product);

    AnnotationSet set{{"q", "p"}, I, H, A, {}};
    EXPECT_EQ(json(set).get<AnnotationSet>(), set);

    Judgment j{{"q", "p"}, LlmSource{"m", Variant::mllm_multi}, H, "because", TokenUsage{10, 2}, 15, "2026-01-01T00:00:00.000Z"};
    EXPECT_EQ(json(j).get<Judgment>(), j);
    EXPECT_EQ(source_name(j.source), "llm:m:mllm_multi");
    EXPECT_EQ(source_name(HumanSource{"A1"}), "human:A1");
}

TEST(Serialization, MissingFieldIsNamed) {
    try {
        (void)json::parse(R"({"query_id":"q"})").get<PairId>();
        FAIL() << "expected InvalidInput";
    } catch (const InvalidInput& e) {
        EXPECT_NE(std::string(e.what()).find("product_id"), std::string::npos);
    }
}

TEST(Decimal, ExactArithmetic) {
    const Decimal a = Decimal::parse("0.1");
    const Decimal b = Decimal::parse("0.2");
    EXPECT_EQ(a + b, Decimal::parse("0.3"));
    EXPECT_EQ((Decimal::parse("1") / Decimal(3)).to_fixed(4), "0.3333");
    EXPECT_EQ(Decimal::parse("2.50").to_string(), "2.5");
    EXPECT_EQ(Decimal::parse("-0.005").to_fixed(2), "-0.01");
    EXPECT_EQ(Decimal::parse("1.5e3"), Decimal(1500));
    EXPECT_EQ(Decimal::parse("0.012"), Decimal::ratio(12, 1000));
    EXPECT_EQ(Decimal::parse("007"), Decimal(7));
    EXPECT_THROW(Decimal::parse("1e"), InvalidInput);
    EXPECT_THROW(Decimal::parse("abc"), InvalidInput);
}

TEST(Fraction, ValueEqualityAndPercent) {
    EXPECT_EQ((Fraction{2, 4}), (Fraction{1, 2}));
    EXPECT_LT((Fraction{1, 3}), (Fraction{1, 2}));
    EXPECT_EQ((Fraction{656, 1000}).percent(), "65.6");
    EXPECT_EQ((Fraction{2971, 20000}).exact(), Decimal::parse("0.14855"));
}

}  // namespace
}  // namespace relassess
