#include "rankminer/corpus.hpp"
#include "rankminer/error.hpp"
#include "rankminer/lemmatizer.hpp"
#include "rankminer/text.hpp"

#include "support/fixtures.hpp"

#include <doctest.h>

using namespace rankminer;

TEST_CASE("text helpers") {
    CHECK(join({"a", "b", "c"}, " ") == "a b c");
    CHECK(split("a,,b", ',') == std::vector<std::string>{"a", "", "b"});
    CHECK(split_whitespace("  a \t b\n") == std::vector<std::string>{"a", "b"});
    CHECK(trim("  x y ") == "x y");
    CHECK(parse_term(" battery   life ") == Term{"battery", "life"});
    CHECK(format_fixed(0.151412, 5) == "0.15141");
    CHECK(format_fixed(-0.0, 2) == "0.00");
    CHECK(content_lines("# c\n\na\r\n b \n") == std::vector<std::string>{"a", " b "});
    CHECK(format_fixed(-0.0000001, 3) == "0.000");
    CHECK(format_fixed(-0.25, 1) == "-0.2");
    CHECK_THROWS_AS(read_file("/nonexistent/file"), IoError);
}

TEST_CASE("clean_text keeps sentence punctuation and apostrophes") {
    CHECK(clean_text("Hello, World! It's ok?") == "hello, world! it's ok?");
    CHECK(clean_text("a-b/c") == "a b c");
    // U+2019 becomes an apostrophe; other non-ASCII becomes a space
    CHECK(clean_text("don\xE2\x80\x99t") == "don't");
    CHECK(clean_text("caf\xC3\xA9") == "caf  ");
}

TEST_CASE("split_sentences and tokenize") {
    CHECK(split_sentences("one two. three! four? ") == std::vector<std::string>{"one two", "three", "four"});
    CHECK(split_sentences("...") .empty());
    CHECK(tokenize("it's 'quoted' word, 42") == std::vector<std::string>{"it's", "quoted", "word", "42"});
    CHECK(tokenize("'''").empty());
}

TEST_CASE("lemmatizer: exception table then suffix rules") {
    auto lem = Lemmatizer::builtin();
    CHECK(lem.lemmatize("was") == "be");
    CHECK(lem.lemmatize("ads") == "ad");
    CHECK(lem.lemmatize("adverts") == "advert");
    CHECK(lem.lemmatize("batteries") == "battery");
    CHECK(lem.lemmatize("crashes") == "crash");
    CHECK(lem.lemmatize("drains") == "drain");
    CHECK(lem.lemmatize("draining") == "drain");
    CHECK(lem.lemmatize("stopped") == "stop");
    CHECK(lem.lemmatize("added") == "add");
    CHECK(lem.lemmatize("adding") == "add");
    CHECK(lem.lemmatize("running") == "run");
    CHECK(lem.lemmatize("glass") == "glass");
    CHECK(lem.lemmatize("bus") == "bus");
    CHECK(lem.lemmatize("need") == "need");
    CHECK(lem.lemmatize("setting") == "setting");
    CHECK(lem.lemmatize("is") == "be");

    Lemmatizer custom;
    custom.add_exceptions("mice\tmouse\n# comment\n");
    CHECK(custom.lemmatize("mice") == "mouse");
    CHECK_THROWS_AS(custom.add_exceptions("no-tab-here\n"), ValidationError);
}

TEST_CASE("preprocess drops reviews with three or fewer tokens") {
    auto lem = Lemmatizer::builtin();
    RawReview shortr{"1", "a", 5, "Great app, love it", std::nullopt};
    RawReview three{"2", "a", 5, "Great app!!!", std::nullopt};
    RawReview longr{"3", "a", 1, "The ads are annoying. Batteries drain!", std::nullopt};
    CHECK(preprocess(shortr, lem).has_value()); // 4 tokens
    CHECK_FALSE(preprocess(three, lem).has_value());
    auto c = preprocess(longr, lem);
    REQUIRE(c);
    CHECK(c->sentences.size() == 2);
    CHECK(c->sentences[0] == Sentence{"the", "ad", "be", "annoy"});
    CHECK(c->sentences[1] == Sentence{"battery", "drain"});
    CHECK(c->token_count == 6);
}

TEST_CASE("jsonl ingestion collects rejections") {
    std::string data = R"({"id":"1","app_id":"a","rating":5,"text":"fine"}
{"id":"2","app_id":"a","rating":9,"text":"bad rating"}
not json
{"id":3,"app_id":"b","rating":"2","text":"numeric id","date":"2019-01-01"}
{"id":"4","app_id":"a","rating":3}
)";
    auto res = parse_reviews(data, InputFormat::jsonl);
    CHECK(res.corpus.review_count() == 2);
    REQUIRE(res.rejected.size() == 3);
    CHECK(res.rejected[0].record == 2);
    CHECK(res.rejected[1].record == 3);
    CHECK(res.rejected[2].record == 5);
    CHECK(res.corpus.reviews()[1].id == "3");
    CHECK(res.corpus.reviews()[1].rating == 2);
    CHECK(res.corpus.reviews()[1].date == std::optional<std::string>("2019-01-01"));

    CHECK_THROWS_AS(parse_reviews("garbage\n", InputFormat::jsonl), EmptyCorpusError);
}

TEST_CASE("csv ingestion follows RFC 4180 quoting") {
    auto rows = parse_csv("a,\"b,c\",\"d\"\"e\"\r\n1,2,3\n");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == std::vector<std::string>{"a", "b,c", "d\"e"});
    CHECK(rows[1] == std::vector<std::string>{"1", "2", "3"});
    CHECK_THROWS_AS(parse_csv("\"open"), ValidationError);

    std::string data = "id,app_id,rating,text\n1,a,4,\"Multi\nline, text\"\n2,b,x,bad\n";
    auto res = parse_reviews(data, InputFormat::csv);
    REQUIRE(res.corpus.review_count() == 1);
    CHECK(res.corpus.reviews()[0].text == "Multi\nline, text");
    CHECK(res.rejected.size() == 1);
    CHECK(format_from_path("x/REVIEWS.CSV") == InputFormat::csv);
    CHECK(format_from_path("x.jsonl") == InputFormat::jsonl);
}

TEST_CASE("raw export round-trips") {
    std::vector<RawReview> rs{{"1", "a", 2, "some \"quoted\" text", std::nullopt},
                              {"2", "b", 5, "line\nbreak", std::string("2020-02-02")}};
    auto text = fixtures::raw_jsonl(rs);
    auto back = parse_reviews(text, InputFormat::jsonl);
    CHECK(back.corpus.reviews() == rs);
}

TEST_CASE("clean corpus JSONL round-trips and carries a header") {
    auto c = fixtures::corpus({"a b c. d e", "x y z w"});
    auto text = write_clean_jsonl(c);
    CHECK(text.rfind("{\"format\":\"rankminer.clean-corpus\",\"version\":1,\"reviews\":2}\n", 0) == 0);
    auto back = read_clean_jsonl(text);
    CHECK(back.reviews() == c.reviews());
    CHECK_THROWS_AS(read_clean_jsonl("{\"id\":\"1\"}\n"), ValidationError);
}

TEST_CASE("ad filter uses whole-token matches") {
    CHECK(is_ad_token("ad"));
    CHECK(is_ad_token("ads"));
    CHECK(is_ad_token("advert"));
    CHECK(is_ad_token("advertisement"));
    CHECK(is_ad_token("advertising"));
    CHECK_FALSE(is_ad_token("add"));
    CHECK_FALSE(is_ad_token("adder"));
    CHECK_FALSE(is_ad_token("adapt"));
    CHECK_FALSE(is_ad_token("bad"));
    CHECK_FALSE(is_ad_token("adverse"));
    CHECK_FALSE(is_ad_token(""));

    auto c = fixtures::corpus({"too many ad here", "i add song", "advertisement everywhere now", "no thing"});
    auto ads = filter_ad_reviews(c);
    REQUIRE(ads.review_count() == 2);
    CHECK(ads.reviews()[0].id == "r0");
    CHECK(ads.reviews()[1].id == "r2");
}

TEST_CASE("preprocessing is deterministic over a generated corpus") {
    auto planted = fixtures::make_planted_corpus(200, 7);
    RawCorpus raw(planted.reviews, "<planted>");
    auto lem = Lemmatizer::builtin();
    auto a = preprocess_corpus(raw, lem);
    auto b = preprocess_corpus(raw, lem);
    CHECK(a.input_count == 200);
    CHECK(write_clean_jsonl(a.corpus) == write_clean_jsonl(b.corpus));
    for (const auto& r : a.corpus.reviews()) CHECK(r.token_count > 3);
}
