#include "cli.hpp"

#include "rankminer/error.hpp"
#include "rankminer/text.hpp"

#include "support/fixtures.hpp"

#include <doctest.h>

#include <json.hpp>

#include <sstream>

using namespace rankminer;
using fixtures::TempDir;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = cli::run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

// Planted issue reviews plus a block of ad complaints, enough for a small model.
std::vector<RawReview> pipeline_reviews() {
    auto planted = fixtures::make_planted_corpus(300, 5);
    auto reviews = planted.reviews;
    const std::vector<std::string> ad_lines = {
        "too many ads on the free version. the ads pop up after every level",
        "the popup ad covers the screen. i hate the video ads",
        "ads use my data plan. every ad plays a loud video",
        "a banner ad sits over the menu. close the ad and another ad shows",
        "the ad play is so loud. remove ads please",
    };
    for (std::size_t i = 0; i < 120; ++i) {
        RawReview r;
        r.id = "ad" + std::to_string(i);
        r.app_id = "app" + std::to_string(i % 3);
        r.rating = 1 + static_cast<int>(i % 3);
        r.text = ad_lines[i % ad_lines.size()];
        reviews.push_back(std::move(r));
    }
    return reviews;
}

std::string write_config(const TempDir& dir, const std::string& extra = "") {
    auto cfg = dir.file("cfg.json");
    write_file(cfg, R"({"paths": {"corpus": "reviews.jsonl", "issue_specs": "specs.json", "denylist": "deny.txt"},
  "train": {"dim": 16, "epochs": 3, "min_count": 2, "workers": 1},
  "phrases": {"min_count": 5}, "seed": 7)" + extra + "}\n");
    return cfg;
}

void seed_inputs(const TempDir& dir) {
    write_file(dir.file("reviews.jsonl"), fixtures::raw_jsonl(pipeline_reviews()));
    write_file(dir.file("specs.json"), fixtures::specs_json(fixtures::make_planted_corpus(1, 1).specs));
    write_file(dir.file("deny.txt"), "video\nplay\n");
}

std::vector<std::string> keyword_terms(const std::string& tsv) {
    std::vector<std::string> out;
    auto lines = content_lines(tsv);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto cols = split(lines[i], '\t');
        REQUIRE(cols.size() == 3);
        out.push_back(cols[1]);
    }
    return out;
}

} // namespace

TEST_CASE("preprocess reports kept and total counts") {
    TempDir dir("cli");
    std::vector<RawReview> raw = {
        {"a", "app", 5, "Great app, works fine on my phone!", std::nullopt},
        {"b", "app", 1, "meh", std::nullopt},
        {"c", "app", 2, "The ads are everywhere and slow it down.", std::nullopt},
    };
    write_file(dir.file("raw.jsonl"), fixtures::raw_jsonl(raw));
    auto r = run({"preprocess", "--in", dir.file("raw.jsonl"), "--out", dir.file("clean.jsonl")});
    CHECK(r.code == 0);
    CHECK(r.out.find("kept 2 / 3 reviews") != std::string::npos);
    CHECK(std::filesystem::exists(dir.file("clean.jsonl")));

    auto f = run({"filter-ads", "--in", dir.file("clean.jsonl"), "--out", dir.file("ads.jsonl")});
    CHECK(f.code == 0);
    CHECK(f.out.find("kept 1 / 2") != std::string::npos);
}

TEST_CASE("exit codes") {
    TempDir dir("cli");
    CHECK(run({"--help"}).code == 0);
    CHECK(run({"rank", "--help"}).code == 0);
    CHECK(run({"rank", "--no-such-flag"}).code == 1);
    CHECK(run({"frobnicate"}).code == 1);

    auto missing = run({"preprocess", "--in", dir.file("absent.jsonl"), "--out", dir.file("x.jsonl")});
    CHECK(missing.code == 2);
    CHECK(missing.err.rfind("error: ", 0) == 0);

    write_file(dir.file("bad.jsonl"), "not json at all\n");
    auto bad = run({"preprocess", "--in", dir.file("bad.jsonl"), "--out", dir.file("x.jsonl")});
    CHECK(bad.code != 0);
}

TEST_CASE("missing inputs name the key or stage") {
    TempDir dir("cli");
    seed_inputs(dir);
    write_file(dir.file("min.json"), R"({"paths": {"corpus": "reviews.jsonl"}})");
    auto r = run({"rank", "--config", dir.file("min.json")});
    CHECK(r.code == 1);
    CHECK(r.err.find("paths.issue_specs") != std::string::npos);

    auto k = run({"keywords", "--config", dir.file("min.json"), "--seeds", "ad"});
    CHECK(k.code == 1);
    CHECK(k.err.find("rankminer train") != std::string::npos);

    auto none = run({"rank", "--output-dir", dir.file("empty"), "--performance-issues"});
    CHECK(none.code == 1);
    CHECK(none.err.find("paths.corpus") != std::string::npos);
}

TEST_CASE("config parsing") {
    auto cfg = cli::parse_pipeline_config(
        R"({"paths": {"corpus": "r.jsonl", "output_dir": "out"}, "train": {"dim": 32, "workers": 1},
            "grading": {"f": "sigmoid", "ads_only": true}, "k": 20, "seed": 9})",
        "/data");
    CHECK(*cfg.paths.corpus == "/data/r.jsonl");
    CHECK(cfg.paths.output_dir == "/data/out");
    CHECK(cfg.train.dim == 32);
    CHECK(cfg.f.kind == ConfineKind::sigmoid);
    CHECK(cfg.ads_only);
    CHECK(cfg.k == 20);
    CHECK(cfg.seed == 9);

    CHECK_THROWS_AS(cli::parse_pipeline_config(R"({"trian": {}})"), ValidationError);
    CHECK_THROWS_AS(cli::parse_pipeline_config(R"({"train": {"dimm": 3}})"), ValidationError);
    CHECK_THROWS_AS(cli::parse_pipeline_config(R"({"train": {"dim": "big"}})"), ValidationError);
    CHECK_THROWS_AS(cli::parse_pipeline_config("[1, 2]"), ValidationError);

    TempDir dir("cli");
    write_file(dir.file("typo.json"), R"({"paths": {"corpus": "r.jsonl"}, "sede": 3})");
    auto r = run({"rank", "--config", dir.file("typo.json")});
    CHECK(r.code == 1);
    CHECK(r.err.find("sede") != std::string::npos);
}

TEST_CASE("stage seeds are stable and distinct") {
    CHECK(cli::derive_seed(1, "train") == cli::derive_seed(1, "train"));
    CHECK(cli::derive_seed(1, "train") != cli::derive_seed(2, "train"));
    CHECK(cli::derive_seed(1, "train") != cli::derive_seed(1, "viz"));
}

TEST_CASE("the full pipeline is byte-reproducible") {
    const std::vector<std::string> artifacts = {"clean.jsonl",  "phrases.tsv",  "model.txt",    "keywords.tsv",
                                                "ads.json",     "scores.json",  "ranking.tsv",  "ranking.json",
                                                "ndcg.json",    "bubbles.svg",  "bubbles.json"};
    std::vector<std::map<std::string, std::string>> outputs;
    for (int pass = 0; pass < 2; ++pass) {
        TempDir dir("pipeline");
        seed_inputs(dir);
        auto cfg = write_config(dir);
        write_file(dir.file("truth.tsv"), "battery\t4\nlogin\t3\noffline\t2\ntheme\t1\n");
        const std::vector<std::vector<std::string>> steps = {
            {"preprocess", "--config", cfg},
            {"phrases", "--config", cfg},
            {"train", "--config", cfg},
            {"keywords", "--config", cfg, "--seeds", "ad,ads", "--k", "50", "--spec-out", dir.file("ads.json")},
            {"grade", "--config", cfg},
            {"rank", "--config", cfg},
            {"eval-ndcg", "--config", cfg, "--predicted", dir.file("ranking.tsv"), "--truth", dir.file("truth.tsv")},
            {"viz", "--config", cfg},
        };
        for (const auto& step : steps) {
            auto r = run(step);
            INFO(step[0] << ": " << r.err);
            REQUIRE(r.code == 0);
        }
        std::map<std::string, std::string> got;
        for (const auto& a : artifacts) {
            INFO(a);
            REQUIRE(std::filesystem::exists(dir.file(a)));
            got[a] = read_file(dir.file(a));
        }
        outputs.push_back(std::move(got));
    }
    for (const auto& a : artifacts) {
        INFO(a);
        CHECK(outputs[0].at(a) == outputs[1].at(a));
    }

    auto terms = keyword_terms(outputs[0].at("keywords.tsv"));
    CHECK(!terms.empty());
    CHECK(terms.size() <= 50);
    for (const auto& t : terms) {
        CHECK(t != "video");
        CHECK(t != "play");
        CHECK(t != "ad");
    }
    CHECK(outputs[0].at("ranking.tsv").rfind("# rankminer issue-scores v1\n", 0) == 0);
    auto ndcg = nlohmann::json::parse(outputs[0].at("ndcg.json"));
    CHECK(ndcg.at("ndcg").get<double>() == 1.0);
}

TEST_CASE("correlate and tests subcommands") {
    TempDir dir("cli");
    write_file(dir.file("pairs.csv"),
               "label,x,y,group\na,10,8.04,g\nb,8,6.95,g\nc,13,7.58,g\nd,9,8.81,g\ne,11,8.33,g\nf,14,9.96,g\n"
               "g,6,7.24,g\nh,4,4.26,g\ni,12,10.84,g\nj,7,4.82,g\nk,5,5.68,g\n");
    auto c = run({"correlate", "--in", dir.file("pairs.csv"), "--out", dir.file("corr.json")});
    REQUIRE(c.code == 0);
    auto cj = nlohmann::json::parse(read_file(dir.file("corr.json")));
    CHECK(cj.at("groups").at("g").at("pearson").at("statistic").get<double>() ==
          doctest::Approx(0.8164205163448396).epsilon(1e-12));

    std::string csv = "app_id,cost_type,with_ads,no_ads\n";
    const double with_ads[] = {12.1, 14.3, 11.8, 15.2, 13.9, 12.7, 16.1, 14.8};
    const double no_ads[] = {10.2, 11.9, 11.1, 12.0, 12.3, 10.8, 13.0, 12.2};
    for (int i = 0; i < 8; ++i) {
        char line[96];
        std::snprintf(line, sizeof line, "app%d,cpu,%.1f,%.1f\n", i, with_ads[i], no_ads[i]);
        csv += line;
    }
    write_file(dir.file("m.csv"), csv);
    auto t = run({"tests", "--measurements", dir.file("m.csv"), "--out", dir.file("tests.json")});
    REQUIRE(t.code == 0);
    auto tj = nlohmann::json::parse(read_file(dir.file("tests.json")));
    CHECK(tj.at("format") == "rankminer.significance-tests");
    CHECK(tj.at("cost_types").contains("cpu"));
}
