#include "rankminer/error.hpp"
#include "rankminer/grading.hpp"
#include "rankminer/resources.hpp"

#include "support/fixtures.hpp"

#include <doctest.h>

#include <cmath>

using namespace rankminer;

TEST_CASE("concern score hand cases") {
    FVariant soft;
    FVariant sig{ConfineKind::sigmoid, 1e-3};
    CHECK(std::abs(concern_score(2.0, 0.1, soft) - 0.15141) < 1e-5);
    CHECK(std::abs(concern_score(0.0, 1.0, sig) - 0.69315) < 1e-5);
    double clamped = concern_score(-5.0, 0.3, soft);
    CHECK(std::isfinite(clamped));
    CHECK(clamped == doctest::Approx(-std::log(1e-3) * 0.3).epsilon(1e-14));
    // upper clamp keeps U positive
    CHECK(concern_score(5.0, 1.0, soft) == doctest::Approx(-std::log(0.82)));
    CHECK(concern_score(-2.0, 0.0, soft) == 0.0);
}

TEST_CASE("confinement functions") {
    FVariant soft;
    CHECK(f_confine(0.9, soft) == 1e-3);
    CHECK(f_confine(3.4, soft) == doctest::Approx(0.5));
    FVariant sig{ConfineKind::sigmoid, 1e-3};
    CHECK(f_confine(0.0, sig) == 0.5);
    CHECK(f_confine(2.0, sig) == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))));
    CHECK_THROWS_AS(f_confine(5.5, soft), ValidationError);
    CHECK_THROWS_AS(concern_score(1.0, 1.5, soft), ValidationError);
    CHECK_THROWS_AS((FVariant{ConfineKind::soft_division, 0.0}).validate(), ValidationError);
    CHECK(parse_confine_kind("sigmoid") == ConfineKind::sigmoid);
    CHECK(parse_confine_kind("soft_division") == ConfineKind::soft_division);
    CHECK_THROWS_AS(parse_confine_kind("tanh"), ValidationError);
}

TEST_CASE("U grows with P and shrinks with R") {
    for (auto kind : {ConfineKind::soft_division, ConfineKind::sigmoid}) {
        FVariant v{kind, 1e-3};
        for (double R = -5.0; R <= 5.0; R += 0.25) {
            double prev = -1.0;
            for (double P = 0.0; P <= 1.0; P += 0.05) {
                double u = concern_score(R, P, v);
                CHECK(u >= prev);
                CHECK(u >= 0.0);
                prev = u;
            }
        }
        for (double P : {0.1, 0.5, 1.0}) {
            double prev = INFINITY;
            for (double R = -5.0; R <= 5.0; R += 0.25) {
                double u = concern_score(R, P, v);
                CHECK(u <= prev);
                prev = u;
            }
        }
    }
}

TEST_CASE("log base rescales U without changing the order") {
    FVariant v;
    std::vector<std::pair<double, double>> rp{{-3, 0.2}, {1.5, 0.6}, {2.0, 0.1}, {-1, 0.05}};
    for (auto [R, P] : rp) {
        double e = concern_score(R, P, v);
        double two = concern_score(R, P, v, 2.0);
        double ten = concern_score(R, P, v, 10.0);
        CHECK(two == doctest::Approx(e / std::log(2.0)));
        CHECK(ten == doctest::Approx(e / std::log(10.0)));
    }
    CHECK_THROWS_AS(concern_score(0, 0.5, v, 1.0), ValidationError);
}

TEST_CASE("term matching is contiguous and sentence-local") {
    CHECK(contains_term({"the", "battery", "drain", "fast"}, {"battery", "drain"}));
    CHECK_FALSE(contains_term({"battery", "fast", "drain"}, {"battery", "drain"}));
    CHECK_FALSE(contains_term({"battery"}, {"battery", "drain"}));
    auto c = fixtures::corpus({"battery. drain here", "so much battery drain. ok then battery drain", "nothing"});
    IssueSpec spec{"battery", {}, {{"battery", "drain"}}};
    auto m = match_reviews(c, spec);
    REQUIRE(m.size() == 1);
    CHECK(m[0].review_index == 1);
    CHECK(m[0].sentence_indices == std::vector<std::size_t>{0, 1});
}

TEST_CASE("grade_issues on a small corpus") {
    auto lex = Lexicon::from_text("bad\t-3\ngood\t2\nhate\t-4\n", "very\t1\n", "not\n");
    auto c = fixtures::corpus({
        "battery drain is bad. the app is good",
        "i hate the battery drain",
        "the ads are good here",
        "nothing to see here",
    });
    std::vector<IssueSpec> specs{{"battery", {}, {{"battery", "drain"}}},
                                 {"ads", {}, {{"ads"}}},
                                 {"crash", {}, {{"crash"}}}};
    GradingOptions opt;
    auto s = grade_issues(c, specs, lex, opt);
    REQUIRE(s.size() == 3);
    CHECK(s[0].N == 2);
    CHECK(s[0].P == 0.5);
    CHECK(*s[0].R == -3.5);
    CHECK(s[0].U == doctest::Approx(-std::log(1e-3) * 0.5));
    CHECK(s[0].matched_review_ids == std::vector<std::string>{"r0", "r1"});
    CHECK(*s[1].R == 2.0);
    CHECK(s[1].U == doctest::Approx(-std::log(0.22) * 0.25));
    CHECK_FALSE(s[2].R.has_value());
    CHECK(s[2].U == 0.0);

    // whole-review scope pulls in the positive second sentence
    opt.scope = SentimentScope::all_review_sentences;
    auto all = grade_issues(c, specs, lex, opt);
    CHECK(*all[0].R == doctest::Approx((-3.0 + 2.0 - 4.0) / 3.0));

    auto ranked = rank_issues(c, specs, lex, GradingOptions{});
    CHECK(ranked[0].issue == "battery");
    CHECK(ranked[1].issue == "ads");
    CHECK(ranked[2].issue == "crash");

    CHECK_THROWS_AS(grade_issues(Corpus{}, specs, lex, opt), EmptyCorpusError);
    CHECK_THROWS_AS(grade_issues(c, {}, lex, opt), ValidationError);
}

TEST_CASE("sort_by_concern breaks ties by N then name") {
    std::vector<IssueScore> s(4);
    s[0].issue = "b"; s[0].U = 1.0; s[0].N = 3;
    s[1].issue = "a"; s[1].U = 1.0; s[1].N = 3;
    s[2].issue = "c"; s[2].U = 1.0; s[2].N = 5;
    s[3].issue = "d"; s[3].U = 2.0; s[3].N = 1;
    sort_by_concern(s);
    CHECK(s[0].issue == "d");
    CHECK(s[1].issue == "c");
    CHECK(s[2].issue == "a");
    CHECK(s[3].issue == "b");
}

TEST_CASE("grading matches a brute-force recount on the planted corpus") {
    auto planted = fixtures::make_planted_corpus(600, 17);
    auto pre = preprocess_corpus(RawCorpus(planted.reviews, "<planted>"), Lemmatizer::builtin());
    REQUIRE(pre.corpus.review_count() == planted.reviews.size());
    auto scores = grade_issues(pre.corpus, planted.specs, Lexicon::builtin(), GradingOptions{});
    auto oracle = fixtures::planted_oracle(planted);
    for (const auto& s : scores) {
        const auto& o = oracle.at(s.issue);
        CHECK(s.N == o.N);
        CHECK(std::abs(s.P - o.P) <= 1e-9);
        REQUIRE(s.R);
        CHECK(std::abs(*s.R - o.R) <= 1e-9);
        CHECK(std::abs(s.U - o.U) <= 1e-9);
    }
}

TEST_CASE("issue specs parse, normalize and round-trip") {
    CHECK_THROWS_AS(parse_issue_specs(R"([{"name":"battery","related_terms":["battery life","battery life"]}])"),
                    ValidationError);

    auto clean = parse_issue_specs(
        R"([{"name":"battery","related_terms":["Batteries draining","battery life","battery drains"]}])");
    auto n = normalize_spec(clean[0], Lemmatizer::builtin());
    CHECK(n.related_terms == std::vector<Term>{{"battery", "drain"}, {"battery", "life"}});
    CHECK(parse_issue_specs(write_issue_specs({n}))[0].related_terms == n.related_terms);

    CHECK_THROWS_AS(parse_issue_specs("{}"), ValidationError);
    CHECK_THROWS_AS(parse_issue_specs("[{\"name\":\"x\"}]"), ValidationError);
    CHECK_THROWS_AS(parse_issue_specs("[{\"name\":\"x\",\"related_terms\":[\"a\"]},{\"name\":\"x\",\"related_terms\":[\"b\"]}]"),
                    ValidationError);
    CHECK_THROWS_AS(parse_issue_specs("not json"), ValidationError);

    auto perf = parse_issue_specs(resources::performance_issues());
    CHECK(perf.size() == 4);
}

TEST_CASE("score files round-trip") {
    std::vector<IssueScore> s(2);
    s[0] = {"battery", -3.25, 10, 0.5, 3.4538776394910684, {"r1", "r2"}};
    s[1] = {"theme", std::nullopt, 0, 0.0, 0.0, {}};
    GradingOptions opt;
    auto json = issue_scores_json(s, opt);
    auto back = read_issue_scores_json(json);
    REQUIRE(back.size() == 2);
    CHECK(back[0].U == s[0].U);
    CHECK(back[0].R == s[0].R);
    CHECK(back[0].matched_review_ids == s[0].matched_review_ids);
    CHECK_FALSE(back[1].R);
    auto tsv = issue_scores_tsv(s);
    CHECK(tsv == "# rankminer issue-scores v1\nrank\tissue\tU\tN\tP\tR\n"
                 "1\tbattery\t3.453878\t10\t0.500000\t-3.250000\n2\ttheme\t0.000000\t0\t0.000000\tNA\n");
    CHECK_THROWS_AS(read_issue_scores_json("{\"format\":\"other\"}"), ValidationError);
}
