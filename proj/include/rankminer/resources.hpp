#pragma once

#include <string_view>

// Default linguistic resources compiled in from data/. Every one of them can
// be replaced at run time by a file in the same format.
namespace rankminer::resources {

std::string_view lemma_table();
std::string_view noun_lexicon();
std::string_view stop_words();
std::string_view sentiment_lexicon();
std::string_view booster_words();
std::string_view negation_words();
std::string_view performance_issues();

} // namespace rankminer::resources
