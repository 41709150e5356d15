#pragma once

#include "rankminer/corpus.hpp"
#include "rankminer/sentiment.hpp"
#include "rankminer/text.hpp"

#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rankminer {

struct IssueSpec {
    std::string name;
    std::vector<Term> seed_terms;
    std::vector<Term> related_terms;

    // Non-empty name and related terms, no duplicate related terms.
    void validate() const;
};

// JSON array of {name, seed_terms, related_terms}; terms are space-separated strings.
std::vector<IssueSpec> parse_issue_specs(std::string_view json_text);
std::string write_issue_specs(const std::vector<IssueSpec>& specs);
// Runs every term through the same cleaning and lemmatization as reviews so
// that "batteries" in a spec matches "battery" in a preprocessed corpus.
IssueSpec normalize_spec(const IssueSpec& spec, const Lemmatizer& lemmatizer);

enum class ConfineKind { soft_division, sigmoid };

struct FVariant {
    ConfineKind kind = ConfineKind::soft_division;
    double epsilon = 1e-3; // clamp floor for soft division

    void validate() const;
};

std::string to_string(ConfineKind kind);
ConfineKind parse_confine_kind(std::string_view name);

// Maps sentiment R in [-5,5] into (0,1). Soft division is clamped to
// [epsilon, 1-epsilon] since (R-0.9)/5 leaves (0,1) for R <= 0.9.
double f_confine(double R, const FVariant& variant);

// U = -log(f(R)) * P. Natural log by default; any base > 1 gives the same ranking.
double concern_score(double R, double P, const FVariant& variant, double log_base = std::numbers::e);

struct IssueMatch {
    std::size_t review_index = 0;
    std::vector<std::size_t> sentence_indices; // sentences holding a related term
};

// True when `term` occurs in `sentence` as a run of consecutive tokens.
bool contains_term(const Sentence& sentence, const Term& term);
std::vector<IssueMatch> match_reviews(const Corpus& corpus, const IssueSpec& spec);

// Which sentences of a matched review feed R.
enum class SentimentScope { matching_sentences, all_review_sentences };

struct GradingOptions {
    FVariant variant;
    SentimentScope scope = SentimentScope::matching_sentences;
};

struct IssueScore {
    std::string issue;
    std::optional<double> R; // absent when no review matches
    std::size_t N = 0;
    double P = 0.0; // N / |corpus|
    double U = 0.0;
    std::vector<std::string> matched_review_ids;
};

// Scores in spec order. P uses the size of `corpus` as the denominator.
std::vector<IssueScore> grade_issues(const Corpus& corpus, const std::vector<IssueSpec>& specs,
                                     const Lexicon& lexicon, const GradingOptions& options);
// U descending, then N descending, then name.
void sort_by_concern(std::vector<IssueScore>& scores);
std::vector<IssueScore> rank_issues(const Corpus& corpus, const std::vector<IssueSpec>& specs,
                                    const Lexicon& lexicon, const GradingOptions& options);

std::string issue_scores_json(const std::vector<IssueScore>& scores, const GradingOptions& options);
std::vector<IssueScore> read_issue_scores_json(std::string_view contents);
std::string issue_scores_tsv(const std::vector<IssueScore>& scores);

} // namespace rankminer
