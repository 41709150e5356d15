#include "rankminer/lemmatizer.hpp"

#include "rankminer/error.hpp"
#include "rankminer/resources.hpp"
#include "rankminer/text.hpp"

#include <algorithm>

namespace rankminer {

namespace {

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool has_vowel(std::string_view s) {
    return std::any_of(s.begin(), s.end(), [](char c) { return is_vowel(c) || c == 'y'; });
}

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool is_consonant_at(std::string_view s, std::size_t i) {
    char c = s[i];
    if (is_vowel(c)) return false;
    if (c == 'y') return i == 0 || !is_consonant_at(s, i - 1);
    return true;
}

// Number of vowel-consonant sequences, as in the Porter stemmer's measure.
int measure(std::string_view s) {
    int m = 0;
    std::size_t i = 0;
    while (i < s.size() && is_consonant_at(s, i)) ++i;
    while (i < s.size()) {
        while (i < s.size() && !is_consonant_at(s, i)) ++i;
        if (i >= s.size()) break;
        while (i < s.size() && is_consonant_at(s, i)) ++i;
        ++m;
    }
    return m;
}

// consonant-vowel-consonant ending whose last consonant is not w, x or y
bool ends_cvc(std::string_view s) {
    auto n = s.size();
    if (n < 3) return false;
    char last = s[n - 1];
    return is_consonant_at(s, n - 3) && !is_consonant_at(s, n - 2) && is_consonant_at(s, n - 1) &&
           last != 'w' && last != 'x' && last != 'y';
}

// Repairs a stem left behind by stripping -ing or -ed.
std::string repair_stem(std::string stem) {
    auto n = stem.size();
    if (ends_with(stem, "at") || ends_with(stem, "bl") || ends_with(stem, "iz")) return stem + "e";
    // three-letter stems keep their double: add, odd, egg
    if (n >= 4 && stem[n - 1] == stem[n - 2] && is_consonant_at(stem, n - 1)) {
        char c = stem[n - 1];
        if (c != 'l' && c != 's' && c != 'z') stem.pop_back();
        return stem;
    }
    if (measure(stem) == 1 && ends_cvc(stem)) return stem + "e";
    return stem;
}

bool all_letters(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

} // namespace

Lemmatizer Lemmatizer::builtin() {
    Lemmatizer l;
    l.add_exceptions(resources::lemma_table());
    return l;
}

void Lemmatizer::add_exceptions(std::string_view table_text) {
    for (const auto& line : content_lines(table_text)) {
        auto cols = split(line, '\t');
        if (cols.size() < 2) throw ValidationError("lemma table line without a tab: '" + line + "'");
        auto surface = std::string(trim(cols[0]));
        auto lemma = std::string(trim(cols[1]));
        if (surface.empty() || lemma.empty())
            throw ValidationError("lemma table line with an empty column: '" + line + "'");
        add_exception(std::move(surface), std::move(lemma));
    }
}

void Lemmatizer::add_exception(std::string surface, std::string lemma) {
    protected_.insert(lemma);
    exceptions_[std::move(surface)] = std::move(lemma);
}

std::string Lemmatizer::lemmatize(std::string_view word) const {
    std::string w(word);
    if (auto it = exceptions_.find(w); it != exceptions_.end()) return it->second;
    if (protected_.count(w) != 0) return w;
    return apply_suffix_rules(w);
}

std::string Lemmatizer::apply_suffix_rules(const std::string& w) const {
    if (w.size() <= 3 || !all_letters(w)) return w;

    if (ends_with(w, "ies") && w.size() > 4) return w.substr(0, w.size() - 3) + "y";
    if (ends_with(w, "sses")) return w.substr(0, w.size() - 2);
    for (std::string_view suf : {"xes", "ches", "shes", "zzes"}) {
        if (ends_with(w, suf)) return w.substr(0, w.size() - 2);
    }
    if (ends_with(w, "s")) {
        if (ends_with(w, "ss") || ends_with(w, "us") || ends_with(w, "is") || ends_with(w, "ous"))
            return w;
        return w.substr(0, w.size() - 1);
    }
    if (ends_with(w, "ing")) {
        auto stem = w.substr(0, w.size() - 3);
        if (stem.size() >= 3 && has_vowel(stem)) return repair_stem(stem);
        return w;
    }
    if (ends_with(w, "ed") && !ends_with(w, "eed")) {
        auto stem = w.substr(0, w.size() - 2);
        if (stem.size() >= 3 && has_vowel(stem)) {
            if (ends_with(stem, "i")) return stem.substr(0, stem.size() - 1) + "y";
            return repair_stem(stem);
        }
        return w;
    }
    return w;
}

} // namespace rankminer
