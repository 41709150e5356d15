#pragma once

#include "rankminer/corpus.hpp"
#include "rankminer/grading.hpp"
#include "rankminer/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

namespace fixtures {

namespace fs = std::filesystem;

// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "rm") {
        static std::atomic<int> counter{0};
        path_ = fs::temp_directory_path() /
                ("rankminer-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

// "a b c. d e" -> one review with two sentences; no lemmatization.
inline rankminer::CleanReview review(const std::string& id, const std::string& text, int rating = 3,
                                     const std::string& app = "app") {
    rankminer::CleanReview r;
    r.id = id;
    r.app_id = app;
    r.rating = rating;
    for (const auto& s : rankminer::split(text, '.')) {
        auto toks = rankminer::split_whitespace(s);
        if (toks.empty()) continue;
        r.token_count += toks.size();
        r.sentences.push_back(std::move(toks));
    }
    return r;
}

inline rankminer::Corpus corpus(const std::vector<std::string>& texts) {
    std::vector<rankminer::CleanReview> rs;
    for (std::size_t i = 0; i < texts.size(); ++i) rs.push_back(review("r" + std::to_string(i), texts[i]));
    return rankminer::Corpus(std::move(rs), "<fixture>");
}

inline std::string raw_jsonl(const std::vector<rankminer::RawReview>& reviews) {
    return rankminer::export_jsonl(rankminer::RawCorpus(reviews, "<fixture>"));
}

// ---------------------------------------------------------------- planted corpus
//
// Reviews built from base-form words only, so preprocessing leaves every
// token unchanged and an oracle can work on the raw text. Four issues are
// planted with decreasing frequency and increasing sentiment; each issue
// sentence carries one sentiment word of known strength.

struct PlantedIssue {
    std::string name;
    std::string term;
    double probability;
    std::vector<std::pair<std::string, int>> words; // sentiment word, lexicon strength
    double relevance;
};

inline std::vector<PlantedIssue> planted_issues() {
    return {
        {"battery", "battery drain", 0.30, {{"terrible", -4}, {"awful", -4}, {"hate", -4}, {"bad", -3}}, 4.0},
        {"login", "login screen", 0.18, {{"bad", -3}, {"poor", -3}, {"annoy", -3}, {"slow", -2}}, 3.0},
        {"offline", "offline mode", 0.09, {{"slow", -2}, {"good", 2}, {"fine", 2}, {"bad", -3}}, 2.0},
        {"theme", "dark theme", 0.04, {{"great", 3}, {"love", 4}, {"nice", 2}, {"excellent", 4}}, 1.0},
    };
}

inline const std::vector<std::string>& filler_sentences() {
    static const std::vector<std::string> s = {
        "i open this app on my phone every day",
        "the music library has a lot of content",
        "my friend use it at work",
        "the search bar is on top",
        "i listen on the train to work",
        "the playlist tab show my list",
    };
    return s;
}

struct PlantedCorpus {
    std::vector<rankminer::RawReview> reviews;
    std::vector<rankminer::IssueSpec> specs;
    std::map<std::string, double> relevance;
};

inline PlantedCorpus make_planted_corpus(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    auto issues = planted_issues();
    const auto& filler = filler_sentences();

    PlantedCorpus out;
    for (const auto& is : issues) {
        out.specs.push_back({is.name, {}, {rankminer::parse_term(is.term)}});
        out.relevance[is.name] = is.relevance;
    }
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::string> sentences;
        sentences.push_back(filler[rng() % filler.size()]);
        for (const auto& is : issues) {
            if (uniform() >= is.probability) continue;
            const auto& w = is.words[rng() % is.words.size()].first;
            sentences.push_back(rng() % 2 ? "the " + is.term + " is " + w : w + " " + is.term + " on my phone");
        }
        if (rng() % 3 == 0) sentences.push_back(filler[rng() % filler.size()]);
        rankminer::RawReview r;
        r.id = "p" + std::to_string(i);
        r.app_id = "app" + std::to_string(i % 7);
        r.rating = 1 + static_cast<int>(rng() % 5);
        r.text = rankminer::join(sentences, ". ") + ".";
        out.reviews.push_back(std::move(r));
    }
    return out;
}

inline std::string specs_json(const std::vector<rankminer::IssueSpec>& specs) {
    return rankminer::write_issue_specs(specs);
}

struct OracleScore {
    std::size_t N = 0;
    double P = 0.0;
    double R = 0.0;
    double U = 0.0;
};

// Recomputes (N, P, R, U) from the raw planted text. Every issue sentence
// holds exactly one sentiment word, so its combined score is that word's
// strength; U uses soft division clamped to [1e-3, 1 - 1e-3].
inline std::map<std::string, OracleScore> planted_oracle(const PlantedCorpus& pc) {
    std::map<std::string, OracleScore> out;
    for (const auto& is : planted_issues()) {
        std::map<std::string, int> strength(is.words.begin(), is.words.end());
        std::vector<std::string> term = rankminer::split_whitespace(is.term);
        double sum = 0.0;
        std::size_t sentences = 0, reviews = 0;
        for (const auto& r : pc.reviews) {
            bool hit = false;
            for (const auto& sent : rankminer::split(r.text, '.')) {
                auto toks = rankminer::split_whitespace(sent);
                bool has = false;
                for (std::size_t i = 0; i + term.size() <= toks.size(); ++i)
                    if (std::equal(term.begin(), term.end(), toks.begin() + static_cast<std::ptrdiff_t>(i))) has = true;
                if (!has) continue;
                hit = true;
                for (const auto& t : toks)
                    if (strength.count(t)) {
                        sum += strength[t];
                        ++sentences;
                    }
            }
            reviews += hit;
        }
        OracleScore s;
        s.N = reviews;
        s.P = static_cast<double>(reviews) / static_cast<double>(pc.reviews.size());
        if (reviews > 0) {
            s.R = sum / static_cast<double>(sentences);
            double f = std::min(std::max((s.R - 0.9) / 5.0, 1e-3), 1.0 - 1e-3);
            s.U = -std::log(f) * s.P;
        }
        out[is.name] = s;
    }
    return out;
}

} // namespace fixtures
