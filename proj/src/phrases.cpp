#include "rankminer/phrases.hpp"

#include "rankminer/error.hpp"
#include "rankminer/resources.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <thread>

namespace rankminer {

namespace {

constexpr std::string_view kPhraseHeader = "# rankminer phrases v1";

void count_into(NGramStats& stats, const Sentence& s) {
    for (std::size_t i = 0; i < s.size(); ++i) {
        ++stats.unigram_counts[s[i]];
        ++stats.total_tokens;
        if (i + 1 < s.size()) {
            ++stats.bigram_counts[{s[i], s[i + 1]}];
            ++stats.total_bigrams;
        }
    }
}

bool is_merged(std::string_view token) { return token.find(kMergeSeparator) != std::string_view::npos; }

bool phrase_less(const Phrase& a, const Phrase& b) {
    if (a.pmi != b.pmi) return a.pmi > b.pmi;
    if (a.count != b.count) return a.count > b.count;
    return a.tokens < b.tokens;
}

bool any_noun(const Term& tokens, const NounPredicate& noun_check) {
    return std::any_of(tokens.begin(), tokens.end(), [&](const std::string& t) { return noun_check(t); });
}

std::vector<Sentence> rewrite(const std::vector<Sentence>& sentences, const std::set<Term>& phrases) {
    std::size_t longest = 0;
    for (const auto& p : phrases) longest = std::max(longest, p.size());
    std::vector<Sentence> out;
    out.reserve(sentences.size());
    for (const auto& s : sentences) {
        Sentence merged;
        std::size_t i = 0;
        while (i < s.size()) {
            bool matched = false;
            for (std::size_t len = std::min(longest, s.size() - i); len >= 2; --len) {
                Term window(s.begin() + static_cast<std::ptrdiff_t>(i),
                            s.begin() + static_cast<std::ptrdiff_t>(i + len));
                if (phrases.count(window)) {
                    merged.push_back(merged_token(window));
                    i += len;
                    matched = true;
                    break;
                }
            }
            if (!matched) merged.push_back(s[i++]);
        }
        out.push_back(std::move(merged));
    }
    return out;
}

std::vector<Sentence> all_sentences(const Corpus& corpus) {
    std::vector<Sentence> out;
    for (const auto& r : corpus.reviews())
        out.insert(out.end(), r.sentences.begin(), r.sentences.end());
    return out;
}

} // namespace

void NGramStats::merge(const NGramStats& other) {
    for (const auto& [w, c] : other.unigram_counts) unigram_counts[w] += c;
    for (const auto& [p, c] : other.bigram_counts) bigram_counts[p] += c;
    total_tokens += other.total_tokens;
    total_bigrams += other.total_bigrams;
}

std::uint64_t NGramStats::unigram(std::string_view w) const {
    auto it = unigram_counts.find(std::string(w));
    return it == unigram_counts.end() ? 0 : it->second;
}

std::uint64_t NGramStats::bigram(std::string_view w1, std::string_view w2) const {
    auto it = bigram_counts.find({std::string(w1), std::string(w2)});
    return it == bigram_counts.end() ? 0 : it->second;
}

NGramStats count_ngrams(const std::vector<Sentence>& sentences) {
    NGramStats stats;
    for (const auto& s : sentences) count_into(stats, s);
    return stats;
}

NGramStats count_ngrams(const Corpus& corpus, unsigned workers) {
    if (corpus.empty()) throw EmptyCorpusError("cannot count n-grams of an empty corpus");
    const auto& reviews = corpus.reviews();
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(reviews.size())));
    std::vector<NGramStats> shards(workers);
    auto work = [&](unsigned w) {
        auto begin = reviews.size() * w / workers, end = reviews.size() * (w + 1) / workers;
        for (auto i = begin; i < end; ++i)
            for (const auto& s : reviews[i].sentences) count_into(shards[w], s);
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> threads;
        for (unsigned w = 0; w < workers; ++w) threads.emplace_back(work, w);
        for (auto& t : threads) t.join();
    }
    NGramStats total;
    for (const auto& s : shards) total.merge(s);
    return total;
}

double pmi_from_probabilities(double joint, double p1, double p2) {
    if (joint <= 0.0 || p1 <= 0.0 || p2 <= 0.0) throw NotObservedError("PMI needs positive probabilities");
    // difference of logs keeps log(p / (p * p)) == -log(p) bit for bit
    return (std::log(joint) - std::log(p1)) - std::log(p2);
}

double pmi(const NGramStats& stats, std::string_view w1, std::string_view w2) {
    auto joint = stats.bigram(w1, w2);
    if (joint == 0) {
        throw NotObservedError("bigram '" + std::string(w1) + " " + std::string(w2) + "' not observed");
    }
    auto c1 = stats.unigram(w1), c2 = stats.unigram(w2);
    if (c1 == 0 || c2 == 0) throw NotObservedError("unigram not observed");
    const auto tokens = static_cast<double>(stats.total_tokens);
    return pmi_from_probabilities(static_cast<double>(joint) / static_cast<double>(stats.total_bigrams),
                                  static_cast<double>(c1) / tokens, static_cast<double>(c2) / tokens);
}

void PhraseConfig::validate() const {
    if (min_count < 1) throw ValidationError("min_count must be >= 1");
    if (passes != 1 && passes != 2) throw ValidationError("passes must be 1 or 2");
    if (!std::isfinite(pmi_threshold_2gram) || !std::isfinite(pmi_threshold_3gram))
        throw ValidationError("PMI thresholds must be finite");
}

NounLexicon::NounLexicon(std::unordered_set<std::string> nouns, std::unordered_set<std::string> non_nouns)
    : nouns_(std::move(nouns)), non_nouns_(std::move(non_nouns)) {}

NounLexicon NounLexicon::from_text(std::string_view noun_lines, std::string_view stop_lines) {
    std::unordered_set<std::string> nouns, stops;
    for (const auto& l : content_lines(noun_lines)) nouns.emplace(trim(l));
    for (const auto& l : content_lines(stop_lines)) stops.emplace(trim(l));
    return NounLexicon(std::move(nouns), std::move(stops));
}

NounLexicon NounLexicon::builtin() { return from_text(resources::noun_lexicon(), resources::stop_words()); }

bool NounLexicon::contains(std::string_view token) const { return nouns_.count(std::string(token)) != 0; }

bool NounLexicon::is_noun(std::string_view token) const {
    std::string t(token);
    if (non_nouns_.count(t)) return false;
    if (nouns_.count(t)) return true;
    for (std::string_view suf : {"tion", "ment", "ness", "ity", "er", "age"}) {
        if (t.size() >= suf.size() + 2 && t.compare(t.size() - suf.size(), suf.size(), suf) == 0) return true;
    }
    return false;
}

bool has_noun(const Term& tokens, const NounLexicon& lexicon) {
    return std::any_of(tokens.begin(), tokens.end(), [&](const std::string& t) { return lexicon.is_noun(t); });
}

NounPredicate noun_predicate(const NounLexicon& lexicon) {
    return [&lexicon](std::string_view token) { return lexicon.is_noun(token); };
}

std::string merged_token(const Term& term) { return join(term, std::string(1, kMergeSeparator)); }

Term split_merged(std::string_view token) { return split(token, kMergeSeparator); }

std::vector<Phrase> mine_phrases(const Corpus& corpus, const PhraseConfig& config, const NounPredicate& noun_check) {
    config.validate();
    auto stats = count_ngrams(corpus);

    std::vector<Phrase> out;
    std::set<Term> bigram_phrases;
    for (const auto& [pair, count] : stats.bigram_counts) {
        if (count < config.min_count) continue;
        double score = pmi(stats, pair.first, pair.second);
        if (score < config.pmi_threshold_2gram) continue;
        Term tokens{pair.first, pair.second};
        if (!any_noun(tokens, noun_check)) continue;
        bigram_phrases.insert(tokens);
        out.push_back({std::move(tokens), score, count});
    }

    if (config.passes == 2 && !bigram_phrases.empty()) {
        auto merged = rewrite(all_sentences(corpus), bigram_phrases);
        auto stats2 = count_ngrams(merged);
        std::map<Term, Phrase> trigrams;
        for (const auto& [pair, count] : stats2.bigram_counts) {
            if (count < config.min_count) continue;
            // Exactly one side is a merged 2-gram, so the candidate has 3 tokens.
            if (is_merged(pair.first) == is_merged(pair.second)) continue;
            double score = pmi(stats2, pair.first, pair.second);
            if (score < config.pmi_threshold_3gram) continue;
            Term tokens = split_merged(pair.first);
            auto right = split_merged(pair.second);
            tokens.insert(tokens.end(), right.begin(), right.end());
            if (!any_noun(tokens, noun_check)) continue;
            auto [it, inserted] = trigrams.try_emplace(tokens, Phrase{tokens, score, count});
            if (!inserted && phrase_less(Phrase{tokens, score, count}, it->second))
                it->second = Phrase{tokens, score, count};
        }
        for (auto& [_, p] : trigrams) out.push_back(std::move(p));
    }

    std::sort(out.begin(), out.end(), phrase_less);
    return out;
}

Corpus merge_phrases(const Corpus& corpus, const std::vector<Term>& phrases) {
    std::set<Term> set;
    for (const auto& p : phrases)
        if (p.size() >= 2) set.insert(p);
    std::vector<CleanReview> out;
    out.reserve(corpus.review_count());
    for (const auto& r : corpus.reviews()) {
        CleanReview m = r;
        if (!set.empty()) m.sentences = rewrite(r.sentences, set);
        m.token_count = 0;
        for (const auto& s : m.sentences) m.token_count += s.size();
        out.push_back(std::move(m));
    }
    return Corpus(std::move(out), corpus.source_path());
}

std::string write_phrase_tsv(const std::vector<Phrase>& phrases) {
    std::string out(kPhraseHeader);
    out += '\n';
    for (const auto& p : phrases) {
        out += term_text(p.tokens);
        out += '\t';
        out += format_fixed(p.pmi, 6);
        out += '\t';
        out += std::to_string(p.count);
        out += '\n';
    }
    return out;
}

std::vector<Phrase> read_phrase_tsv(std::string_view contents) {
    auto lines = split(contents, '\n');
    if (lines.empty() || trim(lines[0]) != kPhraseHeader)
        throw ValidationError("phrase file lacks the '" + std::string(kPhraseHeader) + "' header");
    std::vector<Phrase> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        auto cols = split(lines[i], '\t');
        if (cols.size() != 3) throw ValidationError("phrase file line " + std::to_string(i + 1) + ": expected 3 columns");
        Phrase p;
        p.tokens = parse_term(cols[0]);
        if (p.tokens.size() < 2 || p.tokens.size() > 3)
            throw ValidationError("phrase file line " + std::to_string(i + 1) + ": phrases have 2 or 3 tokens");
        try {
            p.pmi = std::stod(cols[1]);
            p.count = std::stoull(cols[2]);
        } catch (const std::exception&) {
            throw ValidationError("phrase file line " + std::to_string(i + 1) + ": bad number");
        }
        out.push_back(std::move(p));
    }
    return out;
}

} // namespace rankminer
