#pragma once

#include "rankminer/corpus.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

namespace rankminer {

// Term strengths lie in -5..-2 or +2..+5; +-1 encodes "no sentiment".
class Lexicon {
public:
    Lexicon() = default;

    static Lexicon builtin();
    // "term<TAB>strength", "term<TAB>delta", and one negation per line.
    static Lexicon from_text(std::string_view terms, std::string_view boosters, std::string_view negations);

    void add_term(std::string term, int strength);
    void add_booster(std::string term, int delta);
    void add_negation(std::string term);

    std::optional<int> strength(const std::string& token) const;
    std::optional<int> booster(const std::string& token) const;
    bool is_negation(const std::string& token) const { return negations_.count(token) != 0; }
    std::size_t size() const noexcept { return terms_.size(); }

private:
    std::unordered_map<std::string, int> terms_;
    std::unordered_map<std::string, int> boosters_;
    std::unordered_set<std::string> negations_;
};

struct SentenceSentiment {
    int positive = 1; // +1..+5
    int negative = -1; // -5..-1
    int combined = 1;

    bool operator==(const SentenceSentiment&) const = default;
};

// Strongest positive and negative term in the sentence. A booster directly
// before a term moves it away from zero (magnitude capped at 5); a negation
// before the term (or before its booster) flips the sign and lowers the
// magnitude by one, never below 2.
SentenceSentiment score_sentence(const Sentence& sentence, const Lexicon& lexicon);

// The negative score wins when 1.5*|neg| > pos. Throws ValidationError
// when pos is outside [1,5] or neg outside [-5,-1].
int combine(int positive, int negative);

// Mean of combined sentence scores. Throws ValidationError on an empty list.
double issue_sentiment(std::span<const int> combined_scores);

} // namespace rankminer
