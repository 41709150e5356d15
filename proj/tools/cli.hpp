#pragma once

#include "rankminer/embeddings.hpp"
#include "rankminer/grading.hpp"
#include "rankminer/phrases.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rankminer::cli {

struct PathsConfig {
    std::optional<std::string> corpus;       // raw reviews (jsonl or csv)
    std::optional<std::string> clean_corpus; // output of preprocess
    std::optional<std::string> lemma_table;
    std::optional<std::string> sentiment_lexicon;
    std::optional<std::string> booster_words;
    std::optional<std::string> negation_words;
    std::optional<std::string> noun_lexicon;
    std::optional<std::string> stop_words;
    std::optional<std::string> denylist;
    std::optional<std::string> issue_specs;
    std::optional<std::string> labels;
    std::string output_dir = ".";
};

struct PipelineConfig {
    PathsConfig paths;
    PhraseConfig phrases;
    TrainConfig train;
    FVariant f;
    SentimentScope scope = SentimentScope::matching_sentences;
    bool ads_only = false;
    std::size_t k = 50;
    std::uint64_t seed = 1;
};

// Relative paths in the config resolve against `base_dir`. Unknown keys are
// rejected so that typos do not silently fall back to defaults.
PipelineConfig parse_pipeline_config(std::string_view json_text, const std::string& base_dir = ".");
PipelineConfig load_pipeline_config(const std::string& path);

// Per-stage seed derived from the top-level seed.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stage);

// Exit codes: 0 success, 1 validation error, 2 IO error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv);

} // namespace rankminer::cli
