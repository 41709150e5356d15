#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

namespace rankminer {

// Two-stage lemmatizer: an exception table for irregular forms, then a small
// set of deterministic suffix rules (-ies, -es/-s, -ing, -ed).
class Lemmatizer {
public:
    Lemmatizer() = default;

    // Exception table compiled in from data/lemmas.tsv.
    static Lemmatizer builtin();

    // Adds "surface<TAB>lemma" lines; later entries override earlier ones.
    // Throws ValidationError on a line without a tab.
    void add_exceptions(std::string_view table_text);
    void add_exception(std::string surface, std::string lemma);

    std::string lemmatize(std::string_view word) const;

    const std::unordered_map<std::string, std::string>& exceptions() const noexcept {
        return exceptions_;
    }

private:
    std::string apply_suffix_rules(const std::string& word) const;

    std::unordered_map<std::string, std::string> exceptions_;
    // Lemma values of the table; the suffix rules never touch these.
    std::unordered_set<std::string> protected_;
};

} // namespace rankminer
