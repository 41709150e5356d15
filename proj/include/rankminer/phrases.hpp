#pragma once

#include "rankminer/corpus.hpp"
#include "rankminer/text.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace rankminer {

// Separator used when a phrase is rewritten into a single corpus token.
inline constexpr char kMergeSeparator = '_';

struct NGramStats {
    std::unordered_map<std::string, std::uint64_t> unigram_counts;
    std::map<std::pair<std::string, std::string>, std::uint64_t> bigram_counts;
    std::uint64_t total_tokens = 0;
    std::uint64_t total_bigrams = 0;

    // Associative and commutative; used to combine per-shard counts.
    void merge(const NGramStats& other);
    std::uint64_t unigram(std::string_view w) const;
    std::uint64_t bigram(std::string_view w1, std::string_view w2) const;
};

// Counts adjacent pairs within sentences only. Throws EmptyCorpusError.
NGramStats count_ngrams(const Corpus& corpus, unsigned workers = 1);
NGramStats count_ngrams(const std::vector<Sentence>& sentences);

// Natural-log PMI with Pr(w1 w2) = count/total_bigrams and
// Pr(w) = count/total_tokens. Throws NotObservedError for unseen pairs.
double pmi(const NGramStats& stats, std::string_view w1, std::string_view w2);
double pmi_from_probabilities(double joint, double p1, double p2);

struct Phrase {
    Term tokens; // 2 or 3 tokens
    double pmi = 0.0;
    std::uint64_t count = 0;

    bool operator==(const Phrase&) const = default;
};

struct PhraseConfig {
    double pmi_threshold_2gram = 3.0;
    double pmi_threshold_3gram = 2.0;
    std::uint64_t min_count = 5;
    int passes = 2;

    void validate() const;
};

class NounLexicon {
public:
    NounLexicon() = default;
    NounLexicon(std::unordered_set<std::string> nouns, std::unordered_set<std::string> non_nouns);

    // Shipped noun list; stop words never count as nouns.
    static NounLexicon builtin();
    static NounLexicon from_text(std::string_view noun_lines, std::string_view stop_lines = {});

    bool contains(std::string_view token) const;
    // Lexicon hit, or a noun suffix (-tion -ment -ness -ity -er -age).
    bool is_noun(std::string_view token) const;

private:
    std::unordered_set<std::string> nouns_;
    std::unordered_set<std::string> non_nouns_;
};

using NounPredicate = std::function<bool(std::string_view token)>;

bool has_noun(const Term& tokens, const NounLexicon& lexicon);
NounPredicate noun_predicate(const NounLexicon& lexicon);

// Pass 1 keeps 2-grams passing the count, PMI and noun gates. Pass 2 merges
// them into single tokens, recounts, and keeps 3-grams (merged 2-gram plus
// an adjacent word). Sorted by PMI desc, count desc, then text.
std::vector<Phrase> mine_phrases(const Corpus& corpus, const PhraseConfig& config,
                                 const NounPredicate& noun_check);

// Rewrites each sentence, joining phrase occurrences into single tokens
// ("battery_life"). Longest match first, scanning left to right.
Corpus merge_phrases(const Corpus& corpus, const std::vector<Term>& phrases);
std::string merged_token(const Term& term);
Term split_merged(std::string_view token);

std::string write_phrase_tsv(const std::vector<Phrase>& phrases);
std::vector<Phrase> read_phrase_tsv(std::string_view contents);

} // namespace rankminer
