#include "rankminer/error.hpp"
#include "rankminer/sentiment.hpp"

#include "support/fixtures.hpp"

#include <doctest.h>

using namespace rankminer;

namespace {

Lexicon small_lexicon() {
    return Lexicon::from_text("good\t2\ngreat\t3\nlove\t4\nbad\t-3\nterrible\t-4\nhate\t-4\nslow\t-2\n",
                              "very\t1\nextremely\t2\nslightly\t-1\n", "not\nnever\n");
}

Sentence words(const std::string& s) { return split_whitespace(s); }

} // namespace

TEST_CASE("combination rule reproduces the worked examples") {
    CHECK(combine(3, -1) == 3);
    CHECK(combine(1, -1) == -1);
    CHECK(combine(2, -3) == -3);
}

TEST_CASE("combination rule over all 25 score pairs") {
    // negative wins iff 1.5|neg| > pos, i.e. 3|neg| > 2 pos in integers
    for (int pos = 1; pos <= 5; ++pos)
        for (int neg = -5; neg <= -1; ++neg) {
            int expect = 3 * -neg > 2 * pos ? neg : pos;
            CHECK(combine(pos, neg) == expect);
        }
    CHECK_THROWS_AS(combine(0, -1), ValidationError);
    CHECK_THROWS_AS(combine(6, -1), ValidationError);
    CHECK_THROWS_AS(combine(1, 0), ValidationError);
    CHECK_THROWS_AS(combine(1, -6), ValidationError);
}

TEST_CASE("sentence scores take the strongest term per channel") {
    auto lex = small_lexicon();
    auto s = score_sentence(words("good app but terrible ads"), lex);
    CHECK(s.positive == 2);
    CHECK(s.negative == -4);
    CHECK(s.combined == -4);

    auto none = score_sentence(words("the app open"), lex);
    CHECK(none == SentenceSentiment{1, -1, -1});

    auto mixed = score_sentence(words("i love it but it is slow"), lex);
    CHECK(mixed.positive == 4);
    CHECK(mixed.negative == -2);
    CHECK(mixed.combined == 4);
}

TEST_CASE("boosters and negations") {
    auto lex = small_lexicon();
    CHECK(score_sentence(words("very good"), lex).positive == 3);
    CHECK(score_sentence(words("extremely bad"), lex).negative == -5);
    CHECK(score_sentence(words("extremely hate"), lex).negative == -5); // capped
    CHECK(score_sentence(words("slightly good"), lex).positive == 2);   // floor at 2
    CHECK(score_sentence(words("slightly bad"), lex).negative == -2);
    // negation flips and weakens
    auto ng = score_sentence(words("not good"), lex);
    CHECK(ng.positive == 1);
    CHECK(ng.negative == -2);
    auto nb = score_sentence(words("not terrible"), lex);
    CHECK(nb.positive == 3);
    CHECK(nb.negative == -1);
    // negation before the booster
    auto nvg = score_sentence(words("not very good"), lex);
    CHECK(nvg.negative == -2);
    CHECK(nvg.positive == 1);
    // booster or negation only counts directly before the term
    CHECK(score_sentence(words("very nice good"), lex).positive == 2);
    CHECK(score_sentence(words("not the good"), lex).positive == 2);
}

TEST_CASE("builtin lexicon covers both surface and lemma forms") {
    auto lex = Lexicon::builtin();
    CHECK(lex.strength("annoy").value_or(0) < 0);
    CHECK(lex.strength("annoying").value_or(0) < 0);
    CHECK(lex.strength("love").value_or(0) > 0);
    CHECK(lex.booster("very").has_value());
    CHECK(lex.is_negation("not"));
    CHECK(lex.size() > 200);
}

TEST_CASE("lexicon validation") {
    Lexicon lex;
    CHECK_THROWS_AS(lex.add_term("meh", 1), ValidationError);
    CHECK_THROWS_AS(lex.add_term("wow", 6), ValidationError);
    CHECK_THROWS_AS(lex.add_booster("zero", 0), ValidationError);
    CHECK_THROWS_AS(Lexicon::from_text("good two\n", "", ""), ValidationError);
}

TEST_CASE("issue sentiment is the mean of combined scores") {
    std::vector<int> s{-3, -1, 4};
    CHECK(issue_sentiment(s) == doctest::Approx(0.0));
    std::vector<int> t{-4, -2};
    CHECK(issue_sentiment(t) == -3.0);
    CHECK_THROWS_AS(issue_sentiment(std::vector<int>{}), ValidationError);
}

TEST_CASE("combined score always lies in the valid range") {
    auto lex = Lexicon::builtin();
    auto planted = fixtures::make_planted_corpus(300, 3);
    for (const auto& r : planted.reviews) {
        auto s = score_sentence(split_whitespace(r.text), lex);
        CHECK(s.positive >= 1);
        CHECK(s.positive <= 5);
        CHECK(s.negative <= -1);
        CHECK(s.negative >= -5);
        CHECK((s.combined == s.positive || s.combined == s.negative));
    }
}
