#pragma once

#include "rankminer/lemmatizer.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rankminer {

struct RawReview {
    std::string id;
    std::string app_id;
    int rating = 0; // 1..5 stars
    std::string text;
    std::optional<std::string> date;

    bool operator==(const RawReview&) const = default;
};

using Sentence = std::vector<std::string>;

struct CleanReview {
    std::string id;
    std::string app_id;
    int rating = 0;
    std::vector<Sentence> sentences;
    std::size_t token_count = 0;

    bool operator==(const CleanReview&) const = default;
};

// Immutable, ordered collection of reviews.
template <class Review>
class BasicCorpus {
public:
    BasicCorpus() = default;
    BasicCorpus(std::vector<Review> reviews, std::string source_path)
        : reviews_(std::move(reviews)), source_path_(std::move(source_path)) {}

    const std::vector<Review>& reviews() const noexcept { return reviews_; }
    const std::string& source_path() const noexcept { return source_path_; }
    std::size_t review_count() const noexcept { return reviews_.size(); }
    bool empty() const noexcept { return reviews_.empty(); }

private:
    std::vector<Review> reviews_;
    std::string source_path_;
};

using RawCorpus = BasicCorpus<RawReview>;
using Corpus = BasicCorpus<CleanReview>;

enum class InputFormat { jsonl, csv };

struct Rejection {
    std::size_t record = 0; // 1-based record number within the file
    std::string reason;
};

struct IngestResult {
    RawCorpus corpus;
    std::vector<Rejection> rejected;
};

// Reads raw reviews. Malformed records are skipped and reported.
// Throws IoError if the file cannot be read and EmptyCorpusError if nothing parses.
IngestResult ingest(const std::string& path, InputFormat format);
IngestResult parse_reviews(std::string_view contents, InputFormat format,
                           const std::string& source_path = "<memory>");
InputFormat format_from_path(const std::string& path);

std::string export_jsonl(const RawCorpus& corpus);

// RFC-4180 record splitter; exposed for tests.
std::vector<std::vector<std::string>> parse_csv(std::string_view contents);

// Lowercases, drops non-ASCII and symbols other than . ! ? , ; and apostrophes.
std::string clean_text(std::string_view text);
// Splits on . ! ?; trims; drops empty segments.
std::vector<std::string> split_sentences(std::string_view text);
std::vector<std::string> tokenize(std::string_view sentence);

// Absent when the review keeps three or fewer tokens.
std::optional<CleanReview> preprocess(const RawReview& review, const Lemmatizer& lemmatizer);

struct PreprocessResult {
    Corpus corpus;
    std::size_t input_count = 0;
};
PreprocessResult preprocess_corpus(const RawCorpus& raw, const Lemmatizer& lemmatizer);

// "ad", "ads", or any token starting with "advert".
bool is_ad_token(std::string_view token);
bool mentions_ads(const CleanReview& review);
Corpus filter_ad_reviews(const Corpus& corpus);

// Preprocessed corpus persistence: a JSONL file whose first line is a
// format header.
std::string write_clean_jsonl(const Corpus& corpus);
Corpus read_clean_jsonl(std::string_view contents, const std::string& source_path = "<memory>");
Corpus load_clean_corpus(const std::string& path);

} // namespace rankminer
