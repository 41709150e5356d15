#pragma once

#include "rankminer/corpus.hpp"
#include "rankminer/text.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace rankminer {

class Vocabulary {
public:
    Vocabulary() = default;
    // Tokens are indexed by descending count, ties broken lexicographically.
    Vocabulary(const std::map<std::string, std::uint64_t>& counts, std::uint64_t min_count);
    // Keeps the given order; used when loading a stored model.
    static Vocabulary from_tokens(std::vector<std::string> tokens);

    std::optional<std::size_t> index(std::string_view token) const;
    bool contains(std::string_view token) const { return index(token).has_value(); }
    const std::string& token(std::size_t i) const { return tokens_.at(i); }
    std::uint64_t count(std::size_t i) const { return counts_.at(i); }
    const std::vector<std::string>& tokens() const noexcept { return tokens_; }
    const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }
    std::size_t size() const noexcept { return tokens_.size(); }
    std::uint64_t min_count() const noexcept { return min_count_; }

private:
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::string> tokens_;
    std::vector<std::uint64_t> counts_;
    std::uint64_t min_count_ = 0;
};

// Throws EmptyCorpusError on an empty corpus and ValidationError when
// no token reaches min_count.
Vocabulary build_vocab(const Corpus& corpus, std::uint64_t min_count);

struct TrainConfig {
    int dim = 100;
    int window = 5;
    int negative = 5;
    int epochs = 5;
    double initial_lr = 0.025;
    std::uint64_t min_count = 5;
    std::uint64_t seed = 1;
    double subsample_threshold = 1e-3; // <= 0 disables subsampling
    // More than one worker shares the matrices without locks and is not reproducible.
    unsigned workers = 1;

    void validate() const;
};

class EmbeddingModel {
public:
    EmbeddingModel() = default;
    EmbeddingModel(Vocabulary vocab, int dim, std::vector<double> vectors);

    const Vocabulary& vocab() const noexcept { return vocab_; }
    int dim() const noexcept { return dim_; }
    std::span<const double> row(std::size_t i) const;
    // Throws OovError.
    std::span<const double> vector(std::string_view token) const;
    const std::vector<double>& data() const noexcept { return vectors_; }

private:
    Vocabulary vocab_;
    int dim_ = 0;
    std::vector<double> vectors_; // |V| x dim, row-major
};

struct TrainResult {
    EmbeddingModel model;
    // Mean negative-sampling loss on a fixed probe batch: entry 0 before
    // training, entry e after epoch e.
    std::vector<double> probe_loss;
};

TrainResult train_skipgram(const Corpus& corpus, const TrainConfig& config);

// One skip-gram negative-sampling step for a single (center, context) pair,
// exactly as the trainer applies it.
void sgns_pair_update(std::span<double> center, std::span<double> context,
                      const std::vector<std::span<double>>& negatives, double lr);
// -log s(c.o) - sum log s(-c.n)
double sgns_pair_loss(std::span<const double> center, std::span<const double> context,
                      const std::vector<std::span<const double>>& negatives);

struct TermVector {
    Term term;
    std::vector<double> vector;
};

// Sum of the constituent word vectors. Throws OovError naming the token.
TermVector phrase_vector(const EmbeddingModel& model, const Term& term);
// The merged-token vector when the phrase was trained as one token, else the sum.
TermVector term_vector(const EmbeddingModel& model, const Term& term);

// Throws ValidationError on a length mismatch or a zero vector.
double cosine_similarity(std::span<const double> u, std::span<const double> v);

struct ScoredTerm {
    Term term;
    double similarity = 0.0;
};

// Candidates are every vocabulary entry plus `extra_candidates` (mined
// phrases); each scores its maximum cosine over the seeds. Seeds and
// denylisted terms are excluded.
std::vector<ScoredTerm> top_k_similar(const EmbeddingModel& model, const std::vector<Term>& seeds, std::size_t k,
                                      const std::set<Term>& denylist,
                                      const std::vector<Term>& extra_candidates = {});

std::set<Term> parse_denylist(std::string_view contents);

std::string write_word2vec_text(const EmbeddingModel& model);
EmbeddingModel read_word2vec_text(std::string_view contents);

} // namespace rankminer
