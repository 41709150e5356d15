#include "rankminer/sentiment.hpp"

#include "rankminer/error.hpp"
#include "rankminer/resources.hpp"
#include "rankminer/text.hpp"

#include <algorithm>
#include <cstdlib>

namespace rankminer {

namespace {

int parse_int(const std::string& s, const std::string& line) {
    try {
        std::size_t used = 0;
        int v = std::stoi(s, &used);
        if (used != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ValidationError("expected an integer in line '" + line + "'");
    }
}

std::pair<std::string, int> term_and_value(const std::string& line) {
    auto cols = split(line, '\t');
    if (cols.size() < 2) throw ValidationError("expected 'term<TAB>value': '" + line + "'");
    return {std::string(trim(cols[0])), parse_int(std::string(trim(cols[1])), line)};
}

} // namespace

Lexicon Lexicon::builtin() {
    return from_text(resources::sentiment_lexicon(), resources::booster_words(), resources::negation_words());
}

Lexicon Lexicon::from_text(std::string_view terms, std::string_view boosters, std::string_view negations) {
    Lexicon lex;
    for (const auto& line : content_lines(terms)) {
        auto [t, v] = term_and_value(line);
        lex.add_term(std::move(t), v);
    }
    for (const auto& line : content_lines(boosters)) {
        auto [t, v] = term_and_value(line);
        lex.add_booster(std::move(t), v);
    }
    for (const auto& line : content_lines(negations)) lex.add_negation(std::string(trim(line)));
    return lex;
}

void Lexicon::add_term(std::string term, int strength) {
    if (strength < -5 || strength > 5 || (strength >= -1 && strength <= 1))
        throw ValidationError("sentiment strength for '" + term + "' must be in -5..-2 or 2..5");
    terms_[std::move(term)] = strength;
}

void Lexicon::add_booster(std::string term, int delta) {
    if (delta == 0 || std::abs(delta) > 3) throw ValidationError("booster delta for '" + term + "' must be in -3..3, nonzero");
    boosters_[std::move(term)] = delta;
}

void Lexicon::add_negation(std::string term) { negations_.insert(std::move(term)); }

std::optional<int> Lexicon::strength(const std::string& token) const {
    auto it = terms_.find(token);
    if (it == terms_.end()) return std::nullopt;
    return it->second;
}

std::optional<int> Lexicon::booster(const std::string& token) const {
    auto it = boosters_.find(token);
    if (it == boosters_.end()) return std::nullopt;
    return it->second;
}

SentenceSentiment score_sentence(const Sentence& sentence, const Lexicon& lexicon) {
    SentenceSentiment out;
    for (std::size_t i = 0; i < sentence.size(); ++i) {
        auto s = lexicon.strength(sentence[i]);
        if (!s) continue;
        int sign = *s > 0 ? 1 : -1;
        int magnitude = std::abs(*s);
        std::ptrdiff_t j = static_cast<std::ptrdiff_t>(i) - 1;
        if (j >= 0) {
            if (auto delta = lexicon.booster(sentence[static_cast<std::size_t>(j)])) {
                magnitude = std::clamp(magnitude + *delta, 2, 5);
                --j;
            }
        }
        if (j >= 0 && lexicon.is_negation(sentence[static_cast<std::size_t>(j)])) {
            sign = -sign;
            magnitude = std::max(magnitude - 1, 2);
        }
        const int adjusted = sign * magnitude;
        if (adjusted > 0)
            out.positive = std::max(out.positive, adjusted);
        else
            out.negative = std::min(out.negative, adjusted);
    }
    out.combined = combine(out.positive, out.negative);
    return out;
}

int combine(int positive, int negative) {
    if (positive < 1 || positive > 5) throw ValidationError("positive score must be in [1,5]");
    if (negative < -5 || negative > -1) throw ValidationError("negative score must be in [-5,-1]");
    return 1.5 * -negative > positive ? negative : positive;
}

double issue_sentiment(std::span<const int> combined_scores) {
    if (combined_scores.empty()) throw ValidationError("issue sentiment of an empty sentence list");
    double sum = 0.0;
    for (int s : combined_scores) sum += s;
    return sum / static_cast<double>(combined_scores.size());
}

} // namespace rankminer
