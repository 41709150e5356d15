#include "rankminer/embeddings.hpp"

#include "rankminer/error.hpp"
#include "rankminer/phrases.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

namespace rankminer {

namespace {

// Matrix cell access. The shared variant is used by multi-worker training,
// where rows are updated concurrently without locks.
struct PlainCell {
    static double load(const double& x) { return x; }
    static void store(double& x, double v) { x = v; }
};

struct SharedCell {
    static double load(const double& x) {
        return std::atomic_ref<double>(const_cast<double&>(x)).load(std::memory_order_relaxed);
    }
    static void store(double& x, double v) { std::atomic_ref<double>(x).store(v, std::memory_order_relaxed); }
};

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// -log(sigmoid(x)) without overflow
double neg_log_sigmoid(double x) { return std::max(-x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

template <class Cell>
void sgns_step(double* center, double* const* targets, std::size_t n_targets, int dim, double lr, double* scratch) {
    std::fill(scratch, scratch + dim, 0.0);
    for (std::size_t t = 0; t < n_targets; ++t) {
        double* target = targets[t];
        const double label = t == 0 ? 1.0 : 0.0;
        double dot = 0.0;
        for (int d = 0; d < dim; ++d) dot += Cell::load(center[d]) * Cell::load(target[d]);
        const double g = (label - sigmoid(dot)) * lr;
        for (int d = 0; d < dim; ++d) scratch[d] += g * Cell::load(target[d]);
        for (int d = 0; d < dim; ++d) Cell::store(target[d], Cell::load(target[d]) + g * Cell::load(center[d]));
    }
    for (int d = 0; d < dim; ++d) Cell::store(center[d], Cell::load(center[d]) + scratch[d]);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Draws from the unigram distribution raised to the 3/4 power.
class NoiseSampler {
public:
    explicit NoiseSampler(const std::vector<std::uint64_t>& counts) {
        cumulative_.reserve(counts.size());
        double acc = 0.0;
        for (auto c : counts) {
            acc += std::pow(static_cast<double>(c), 0.75);
            cumulative_.push_back(acc);
        }
    }
    std::size_t draw(std::mt19937_64& rng) const {
        double u = uniform01(rng) * cumulative_.back();
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), cumulative_.size() - 1);
    }

private:
    std::vector<double> cumulative_;
};

struct Probe {
    std::size_t center;
    std::size_t context;
    std::vector<std::size_t> negatives;
};

double probe_loss(const std::vector<Probe>& probes, const std::vector<double>& input,
                  const std::vector<double>& output, int dim) {
    if (probes.empty()) return 0.0;
    double total = 0.0;
    auto dot = [&](std::size_t a, std::size_t b) {
        double s = 0.0;
        for (int d = 0; d < dim; ++d) s += input[a * dim + d] * output[b * dim + d];
        return s;
    };
    for (const auto& p : probes) {
        total += neg_log_sigmoid(dot(p.center, p.context));
        for (auto n : p.negatives) total += neg_log_sigmoid(-dot(p.center, n));
    }
    return total / static_cast<double>(probes.size());
}

class Trainer {
public:
    Trainer(const Corpus& corpus, const TrainConfig& config)
        : config_(config), vocab_(build_vocab(corpus, config.min_count)), noise_(vocab_.counts()) {
        for (const auto& r : corpus.reviews()) {
            for (const auto& s : r.sentences) {
                std::vector<std::size_t> ids;
                for (const auto& tok : s)
                    if (auto i = vocab_.index(tok)) ids.push_back(*i);
                if (!ids.empty()) {
                    train_words_ += ids.size();
                    sentences_.push_back(std::move(ids));
                }
            }
        }
        const auto rows = vocab_.size() * static_cast<std::size_t>(config_.dim);
        input_.resize(rows);
        output_.assign(rows, 0.0);
        std::mt19937_64 rng(config_.seed);
        for (auto& x : input_) x = (uniform01(rng) - 0.5) / config_.dim;
        build_probes();
    }

    TrainResult run() {
        TrainResult result;
        result.probe_loss.push_back(probe_loss(probes_, input_, output_, config_.dim));
        scheduled_ = static_cast<double>(config_.epochs) * static_cast<double>(train_words_) + 1.0;
        for (int epoch = 0; epoch < config_.epochs; ++epoch) {
            if (config_.workers <= 1) {
                std::mt19937_64 rng(config_.seed + 0x9E3779B97F4A7C15ULL * (epoch + 1));
                run_shard<PlainCell>(0, sentences_.size(), rng);
            } else {
                std::vector<std::thread> threads;
                const auto n = sentences_.size();
                for (unsigned w = 0; w < config_.workers; ++w) {
                    threads.emplace_back([this, w, n, epoch] {
                        std::mt19937_64 rng(config_.seed + 0x9E3779B97F4A7C15ULL * (epoch + 1) + w);
                        run_shard<SharedCell>(n * w / config_.workers, n * (w + 1) / config_.workers, rng);
                    });
                }
                for (auto& t : threads) t.join();
            }
            result.probe_loss.push_back(probe_loss(probes_, input_, output_, config_.dim));
        }
        result.model = EmbeddingModel(std::move(vocab_), config_.dim, std::move(input_));
        return result;
    }

private:
    template <class Cell>
    void run_shard(std::size_t begin, std::size_t end, std::mt19937_64& rng) {
        const int dim = config_.dim;
        std::vector<double> scratch(static_cast<std::size_t>(dim));
        std::vector<double*> targets;
        std::vector<std::size_t> kept;
        const double sample = config_.subsample_threshold * static_cast<double>(train_words_);
        for (auto si = begin; si < end; ++si) {
            const auto& sentence = sentences_[si];
            kept.clear();
            for (auto id : sentence) {
                if (config_.subsample_threshold > 0.0) {
                    const double freq = static_cast<double>(vocab_.count(id));
                    const double keep = (std::sqrt(freq / sample) + 1.0) * sample / freq;
                    if (keep < uniform01(rng)) continue;
                }
                kept.push_back(id);
            }
            // Subsampled tokens still count towards the learning-rate schedule.
            processed_.fetch_add(sentence.size() - kept.size(), std::memory_order_relaxed);
            for (std::size_t pos = 0; pos < kept.size(); ++pos) {
                auto done = processed_.fetch_add(1, std::memory_order_relaxed);
                const double lr = config_.initial_lr *
                                  std::max(1e-4, 1.0 - static_cast<double>(done) / scheduled_);
                const int reach = config_.window - static_cast<int>(rng() % static_cast<unsigned>(config_.window));
                double* center = &input_[kept[pos] * dim];
                for (int off = -reach; off <= reach; ++off) {
                    if (off == 0) continue;
                    const auto ctx_pos = static_cast<std::ptrdiff_t>(pos) + off;
                    if (ctx_pos < 0 || ctx_pos >= static_cast<std::ptrdiff_t>(kept.size())) continue;
                    const auto context = kept[static_cast<std::size_t>(ctx_pos)];
                    targets.clear();
                    targets.push_back(&output_[context * dim]);
                    for (int n = 0; n < config_.negative; ++n) {
                        auto neg = noise_.draw(rng);
                        if (neg == context) continue;
                        targets.push_back(&output_[neg * dim]);
                    }
                    sgns_step<Cell>(center, targets.data(), targets.size(), dim, lr, scratch.data());
                }
            }
        }
    }

    void build_probes() {
        std::mt19937_64 rng(config_.seed ^ 0xA5A5A5A5A5A5A5A5ULL);
        constexpr std::size_t kMaxProbes = 512;
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        for (const auto& s : sentences_)
            for (std::size_t i = 0; i + 1 < s.size(); ++i) pairs.emplace_back(s[i], s[i + 1]);
        if (pairs.empty()) return;
        for (std::size_t p = 0; p < std::min(kMaxProbes, pairs.size()); ++p) {
            const auto& [c, o] = pairs[rng() % pairs.size()];
            Probe probe{c, o, {}};
            for (int n = 0; n < config_.negative; ++n) {
                auto neg = noise_.draw(rng);
                if (neg != o) probe.negatives.push_back(neg);
            }
            probes_.push_back(std::move(probe));
        }
    }

    TrainConfig config_;
    Vocabulary vocab_;
    NoiseSampler noise_;
    std::vector<std::vector<std::size_t>> sentences_;
    std::uint64_t train_words_ = 0;
    double scheduled_ = 1.0;
    std::atomic<std::uint64_t> processed_{0};
    std::vector<double> input_;
    std::vector<double> output_;
    std::vector<Probe> probes_;
};

} // namespace

Vocabulary::Vocabulary(const std::map<std::string, std::uint64_t>& counts, std::uint64_t min_count)
    : min_count_(min_count) {
    std::vector<std::pair<std::string, std::uint64_t>> kept;
    for (const auto& [tok, c] : counts)
        if (c >= min_count) kept.emplace_back(tok, c);
    std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    for (auto& [tok, c] : kept) {
        index_.emplace(tok, tokens_.size());
        tokens_.push_back(tok);
        counts_.push_back(c);
    }
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
    Vocabulary v;
    for (auto& t : tokens) {
        if (!v.index_.emplace(t, v.tokens_.size()).second)
            throw ValidationError("duplicate vocabulary token '" + t + "'");
        v.tokens_.push_back(std::move(t));
        v.counts_.push_back(0);
    }
    return v;
}

std::optional<std::size_t> Vocabulary::index(std::string_view token) const {
    auto it = index_.find(std::string(token));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

Vocabulary build_vocab(const Corpus& corpus, std::uint64_t min_count) {
    if (corpus.empty()) throw EmptyCorpusError("cannot build a vocabulary from an empty corpus");
    std::map<std::string, std::uint64_t> counts;
    for (const auto& r : corpus.reviews())
        for (const auto& s : r.sentences)
            for (const auto& t : s) ++counts[t];
    Vocabulary v(counts, min_count);
    if (v.size() == 0)
        throw ValidationError("vocabulary is empty after applying min_count=" + std::to_string(min_count));
    return v;
}

void TrainConfig::validate() const {
    if (dim < 1) throw ValidationError("dim must be >= 1");
    if (window < 1) throw ValidationError("window must be >= 1");
    if (negative < 1) throw ValidationError("negative must be >= 1");
    if (epochs < 1) throw ValidationError("epochs must be >= 1");
    if (!(initial_lr > 0.0) || !std::isfinite(initial_lr)) throw ValidationError("initial_lr must be > 0");
    if (workers < 1) throw ValidationError("workers must be >= 1");
}

EmbeddingModel::EmbeddingModel(Vocabulary vocab, int dim, std::vector<double> vectors)
    : vocab_(std::move(vocab)), dim_(dim), vectors_(std::move(vectors)) {
    if (dim_ < 1) throw ValidationError("embedding dimension must be >= 1");
    if (vectors_.size() != vocab_.size() * static_cast<std::size_t>(dim_))
        throw ValidationError("embedding matrix does not match vocabulary size");
    if (!std::all_of(vectors_.begin(), vectors_.end(), [](double x) { return std::isfinite(x); }))
        throw ValidationError("embedding matrix holds non-finite values");
}

std::span<const double> EmbeddingModel::row(std::size_t i) const {
    if (i >= vocab_.size()) throw ValidationError("row index out of range");
    return {vectors_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
}

std::span<const double> EmbeddingModel::vector(std::string_view token) const {
    auto i = vocab_.index(token);
    if (!i) throw OovError(std::string(token));
    return row(*i);
}

TrainResult train_skipgram(const Corpus& corpus, const TrainConfig& config) {
    config.validate();
    Trainer trainer(corpus, config);
    return trainer.run();
}

void sgns_pair_update(std::span<double> center, std::span<double> context,
                      const std::vector<std::span<double>>& negatives, double lr) {
    const auto dim = center.size();
    std::vector<double*> targets{context.data()};
    if (context.size() != dim) throw ValidationError("vector length mismatch");
    for (auto n : negatives) {
        if (n.size() != dim) throw ValidationError("vector length mismatch");
        targets.push_back(n.data());
    }
    std::vector<double> scratch(dim);
    sgns_step<PlainCell>(center.data(), targets.data(), targets.size(), static_cast<int>(dim), lr, scratch.data());
}

double sgns_pair_loss(std::span<const double> center, std::span<const double> context,
                      const std::vector<std::span<const double>>& negatives) {
    auto dot = [&](std::span<const double> v) {
        if (v.size() != center.size()) throw ValidationError("vector length mismatch");
        double s = 0.0;
        for (std::size_t d = 0; d < v.size(); ++d) s += center[d] * v[d];
        return s;
    };
    double loss = neg_log_sigmoid(dot(context));
    for (auto n : negatives) loss += neg_log_sigmoid(-dot(n));
    return loss;
}

TermVector phrase_vector(const EmbeddingModel& model, const Term& term) {
    if (term.empty()) throw ValidationError("empty term");
    TermVector out{term, std::vector<double>(static_cast<std::size_t>(model.dim()), 0.0)};
    for (const auto& tok : term) {
        auto v = model.vector(tok);
        for (std::size_t d = 0; d < v.size(); ++d) out.vector[d] += v[d];
    }
    return out;
}

TermVector term_vector(const EmbeddingModel& model, const Term& term) {
    if (term.size() > 1) {
        if (auto i = model.vocab().index(merged_token(term))) {
            auto r = model.row(*i);
            return {term, std::vector<double>(r.begin(), r.end())};
        }
    }
    return phrase_vector(model, term);
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw ValidationError("cosine of vectors with different lengths");
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) throw ValidationError("cosine of a zero vector");
    return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

std::vector<ScoredTerm> top_k_similar(const EmbeddingModel& model, const std::vector<Term>& seeds, std::size_t k,
                                      const std::set<Term>& denylist, const std::vector<Term>& extra_candidates) {
    if (k < 1) throw ValidationError("k must be >= 1");
    if (seeds.empty()) throw ValidationError("at least one seed term is required");
    std::vector<std::vector<double>> seed_vectors;
    for (const auto& s : seeds) seed_vectors.push_back(term_vector(model, s).vector);
    const std::set<Term> seed_set(seeds.begin(), seeds.end());

    std::set<Term> candidates;
    for (const auto& tok : model.vocab().tokens()) candidates.insert(split_merged(tok));
    for (const auto& t : extra_candidates) {
        bool known = model.vocab().contains(merged_token(t)) ||
                     std::all_of(t.begin(), t.end(), [&](const std::string& w) { return model.vocab().contains(w); });
        if (!t.empty() && known) candidates.insert(t);
    }

    std::vector<ScoredTerm> scored;
    for (const auto& c : candidates) {
        if (seed_set.count(c) || denylist.count(c)) continue;
        auto v = term_vector(model, c).vector;
        if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; })) continue;
        double best = -1.0;
        for (const auto& sv : seed_vectors) best = std::max(best, cosine_similarity(sv, v));
        scored.push_back({c, best});
    }
    auto by_score = [](const ScoredTerm& a, const ScoredTerm& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return term_text(a.term) < term_text(b.term);
    };
    const auto n = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(), by_score);
    scored.resize(n);
    return scored;
}

std::set<Term> parse_denylist(std::string_view contents) {
    std::set<Term> out;
    for (const auto& line : content_lines(contents)) out.insert(parse_term(line));
    return out;
}

std::string write_word2vec_text(const EmbeddingModel& model) {
    std::string out = std::to_string(model.vocab().size()) + " " + std::to_string(model.dim()) + "\n";
    for (std::size_t i = 0; i < model.vocab().size(); ++i) {
        out += model.vocab().token(i);
        for (double x : model.row(i)) {
            out += ' ';
            out += format_general(x, 6);
        }
        out += '\n';
    }
    return out;
}

EmbeddingModel read_word2vec_text(std::string_view contents) {
    auto lines = split(contents, '\n');
    if (lines.empty()) throw ValidationError("empty model file");
    auto header = split_whitespace(lines[0]);
    if (header.size() != 2) throw ValidationError("model header must be 'V D'");
    std::size_t rows = 0;
    int dim = 0;
    try {
        rows = std::stoull(header[0]);
        dim = std::stoi(header[1]);
    } catch (const std::exception&) {
        throw ValidationError("model header must be 'V D'");
    }
    std::vector<std::string> tokens;
    std::vector<double> values;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto cols = split_whitespace(lines[i]);
        if (cols.empty()) continue;
        if (cols.size() != static_cast<std::size_t>(dim) + 1)
            throw ValidationError("model line " + std::to_string(i + 1) + " has the wrong width");
        tokens.push_back(cols[0]);
        for (std::size_t d = 1; d < cols.size(); ++d) {
            try {
                values.push_back(std::stod(cols[d]));
            } catch (const std::exception&) {
                throw ValidationError("model line " + std::to_string(i + 1) + ": bad number");
            }
        }
    }
    if (tokens.size() != rows) throw ValidationError("model header announces " + std::to_string(rows) + " rows");
    return EmbeddingModel(Vocabulary::from_tokens(std::move(tokens)), dim, std::move(values));
}

} // namespace rankminer
