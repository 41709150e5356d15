#include "rankminer/grading.hpp"

#include "rankminer/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <set>

namespace rankminer {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::string_view kScoresFormat = "rankminer.issue-scores";

std::vector<Term> terms_from_json(const json& arr, const std::string& field) {
    if (!arr.is_array()) throw ValidationError("'" + field + "' must be an array of strings");
    std::vector<Term> out;
    for (const auto& t : arr) {
        if (!t.is_string()) throw ValidationError("'" + field + "' must be an array of strings");
        auto term = parse_term(t.get<std::string>());
        if (term.empty()) throw ValidationError("empty term in '" + field + "'");
        out.push_back(std::move(term));
    }
    return out;
}

json terms_to_json(const std::vector<Term>& terms) {
    json arr = json::array();
    for (const auto& t : terms) arr.push_back(term_text(t));
    return arr;
}

Term normalize_term(const Term& term, const Lemmatizer& lemmatizer) {
    Term out;
    for (const auto& tok : tokenize(clean_text(term_text(term)))) out.push_back(lemmatizer.lemmatize(tok));
    return out;
}

std::vector<Term> normalize_terms(const std::vector<Term>& terms, const Lemmatizer& lemmatizer) {
    std::vector<Term> out;
    std::set<Term> seen;
    for (const auto& t : terms) {
        auto n = normalize_term(t, lemmatizer);
        if (!n.empty() && seen.insert(n).second) out.push_back(std::move(n));
    }
    return out;
}

} // namespace

void IssueSpec::validate() const {
    if (name.empty()) throw ValidationError("issue spec without a name");
    if (related_terms.empty()) throw ValidationError("issue '" + name + "' has no related terms");
    std::set<Term> seen;
    for (const auto& t : related_terms) {
        if (t.empty()) throw ValidationError("issue '" + name + "' has an empty related term");
        if (!seen.insert(t).second)
            throw ValidationError("issue '" + name + "' lists '" + term_text(t) + "' twice");
    }
}

std::vector<IssueSpec> parse_issue_specs(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("issue specs are not valid JSON: ") + e.what());
    }
    if (!doc.is_array() || doc.empty()) throw ValidationError("issue specs must be a non-empty JSON array");
    std::vector<IssueSpec> specs;
    std::set<std::string> names;
    for (const auto& obj : doc) {
        if (!obj.is_object() || !obj.contains("name") || !obj.at("name").is_string())
            throw ValidationError("each issue spec needs a string 'name'");
        IssueSpec s;
        s.name = obj.at("name").get<std::string>();
        if (obj.contains("seed_terms")) s.seed_terms = terms_from_json(obj.at("seed_terms"), "seed_terms");
        if (!obj.contains("related_terms")) throw ValidationError("issue '" + s.name + "' lacks 'related_terms'");
        s.related_terms = terms_from_json(obj.at("related_terms"), "related_terms");
        s.validate();
        if (!names.insert(s.name).second) throw ValidationError("duplicate issue name '" + s.name + "'");
        specs.push_back(std::move(s));
    }
    return specs;
}

std::string write_issue_specs(const std::vector<IssueSpec>& specs) {
    ordered_json arr = ordered_json::array();
    for (const auto& s : specs) {
        ordered_json obj;
        obj["name"] = s.name;
        obj["seed_terms"] = terms_to_json(s.seed_terms);
        obj["related_terms"] = terms_to_json(s.related_terms);
        arr.push_back(std::move(obj));
    }
    return arr.dump(2) + "\n";
}

IssueSpec normalize_spec(const IssueSpec& spec, const Lemmatizer& lemmatizer) {
    IssueSpec out{spec.name, normalize_terms(spec.seed_terms, lemmatizer),
                  normalize_terms(spec.related_terms, lemmatizer)};
    out.validate();
    return out;
}

void FVariant::validate() const {
    if (!(epsilon > 0.0 && epsilon < 0.5)) throw ValidationError("epsilon must lie in (0, 0.5)");
}

std::string to_string(ConfineKind kind) {
    return kind == ConfineKind::soft_division ? "soft_division" : "sigmoid";
}

ConfineKind parse_confine_kind(std::string_view name) {
    if (name == "soft_division" || name == "soft-division") return ConfineKind::soft_division;
    if (name == "sigmoid") return ConfineKind::sigmoid;
    throw ValidationError("unknown confinement function '" + std::string(name) + "'");
}

double f_confine(double R, const FVariant& variant) {
    variant.validate();
    if (!(R >= -5.0 && R <= 5.0)) throw ValidationError("sentiment R must lie in [-5, 5]");
    if (variant.kind == ConfineKind::sigmoid) return 1.0 / (1.0 + std::exp(-R));
    return std::clamp((R - 0.9) / 5.0, variant.epsilon, 1.0 - variant.epsilon);
}

double concern_score(double R, double P, const FVariant& variant, double log_base) {
    if (!(P >= 0.0 && P <= 1.0)) throw ValidationError("review percentage P must lie in [0, 1]");
    if (!(log_base > 1.0)) throw ValidationError("log base must exceed 1");
    const double f = f_confine(R, variant);
    if (P == 0.0) return 0.0;
    double u = -std::log(f) * P;
    if (log_base != std::numbers::e) u /= std::log(log_base);
    return u;
}

bool contains_term(const Sentence& sentence, const Term& term) {
    if (term.empty() || term.size() > sentence.size()) return false;
    return std::search(sentence.begin(), sentence.end(), term.begin(), term.end()) != sentence.end();
}

std::vector<IssueMatch> match_reviews(const Corpus& corpus, const IssueSpec& spec) {
    std::vector<IssueMatch> out;
    const auto& reviews = corpus.reviews();
    for (std::size_t r = 0; r < reviews.size(); ++r) {
        IssueMatch m{r, {}};
        for (std::size_t s = 0; s < reviews[r].sentences.size(); ++s) {
            const auto& sentence = reviews[r].sentences[s];
            if (std::any_of(spec.related_terms.begin(), spec.related_terms.end(),
                            [&](const Term& t) { return contains_term(sentence, t); }))
                m.sentence_indices.push_back(s);
        }
        if (!m.sentence_indices.empty()) out.push_back(std::move(m));
    }
    return out;
}

std::vector<IssueScore> grade_issues(const Corpus& corpus, const std::vector<IssueSpec>& specs,
                                     const Lexicon& lexicon, const GradingOptions& options) {
    if (corpus.empty()) throw EmptyCorpusError("cannot grade issues on an empty corpus");
    if (specs.empty()) throw ValidationError("no issue specs given");
    options.variant.validate();
    const auto total = static_cast<double>(corpus.review_count());
    std::vector<IssueScore> out;
    for (const auto& spec : specs) {
        spec.validate();
        IssueScore score;
        score.issue = spec.name;
        std::vector<int> combined;
        for (const auto& m : match_reviews(corpus, spec)) {
            const auto& review = corpus.reviews()[m.review_index];
            score.matched_review_ids.push_back(review.id);
            if (options.scope == SentimentScope::matching_sentences) {
                for (auto s : m.sentence_indices) combined.push_back(score_sentence(review.sentences[s], lexicon).combined);
            } else {
                for (const auto& s : review.sentences) combined.push_back(score_sentence(s, lexicon).combined);
            }
        }
        score.N = score.matched_review_ids.size();
        score.P = static_cast<double>(score.N) / total;
        if (score.N > 0) {
            score.R = issue_sentiment(combined);
            score.U = concern_score(*score.R, score.P, options.variant);
        }
        out.push_back(std::move(score));
    }
    return out;
}

void sort_by_concern(std::vector<IssueScore>& scores) {
    std::stable_sort(scores.begin(), scores.end(), [](const IssueScore& a, const IssueScore& b) {
        if (a.U != b.U) return a.U > b.U;
        if (a.N != b.N) return a.N > b.N;
        return a.issue < b.issue;
    });
}

std::vector<IssueScore> rank_issues(const Corpus& corpus, const std::vector<IssueSpec>& specs,
                                    const Lexicon& lexicon, const GradingOptions& options) {
    auto scores = grade_issues(corpus, specs, lexicon, options);
    sort_by_concern(scores);
    return scores;
}

std::string issue_scores_json(const std::vector<IssueScore>& scores, const GradingOptions& options) {
    ordered_json doc;
    doc["format"] = kScoresFormat;
    doc["version"] = 1;
    doc["f"] = to_string(options.variant.kind);
    doc["epsilon"] = options.variant.epsilon;
    doc["sentiment_scope"] =
        options.scope == SentimentScope::matching_sentences ? "matching_sentences" : "all_review_sentences";
    ordered_json rows = ordered_json::array();
    for (const auto& s : scores) {
        ordered_json row;
        row["issue"] = s.issue;
        row["R"] = s.R ? ordered_json(*s.R) : ordered_json(nullptr);
        row["N"] = s.N;
        row["P"] = s.P;
        row["U"] = s.U;
        row["matched_review_ids"] = s.matched_review_ids;
        rows.push_back(std::move(row));
    }
    doc["scores"] = std::move(rows);
    return doc.dump(2) + "\n";
}

std::vector<IssueScore> read_issue_scores_json(std::string_view contents) {
    try {
        auto doc = json::parse(contents);
        if (doc.value("format", "") != kScoresFormat) throw ValidationError("not an issue-scores file");
        std::vector<IssueScore> out;
        for (const auto& row : doc.at("scores")) {
            IssueScore s;
            s.issue = row.at("issue").get<std::string>();
            if (!row.at("R").is_null()) s.R = row.at("R").get<double>();
            s.N = row.at("N").get<std::size_t>();
            s.P = row.at("P").get<double>();
            s.U = row.at("U").get<double>();
            s.matched_review_ids = row.at("matched_review_ids").get<std::vector<std::string>>();
            out.push_back(std::move(s));
        }
        return out;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed issue-scores file: ") + e.what());
    }
}

std::string issue_scores_tsv(const std::vector<IssueScore>& scores) {
    std::string out = "# rankminer issue-scores v1\nrank\tissue\tU\tN\tP\tR\n";
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const auto& s = scores[i];
        out += std::to_string(i + 1) + '\t' + s.issue + '\t' + format_fixed(s.U, 6) + '\t' + std::to_string(s.N) +
               '\t' + format_fixed(s.P, 6) + '\t' + (s.R ? format_fixed(*s.R, 6) : std::string("NA")) + '\n';
    }
    return out;
}

} // namespace rankminer
