#include "cli.hpp"

#include "rankminer/bubbleviz.hpp"
#include "rankminer/corpus.hpp"
#include "rankminer/embeddings.hpp"
#include "rankminer/error.hpp"
#include "rankminer/evalstats.hpp"
#include "rankminer/grading.hpp"
#include "rankminer/lemmatizer.hpp"
#include "rankminer/phrases.hpp"
#include "rankminer/sentiment.hpp"
#include "rankminer/text.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace rankminer;

namespace {

std::vector<Term> to_terms(const std::vector<std::string>& texts) {
    std::vector<Term> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(parse_term(t));
    return out;
}

InputFormat parse_format(const std::string& name) {
    if (name == "jsonl") return InputFormat::jsonl;
    if (name == "csv") return InputFormat::csv;
    throw ValidationError("format must be 'jsonl' or 'csv', got '" + name + "'");
}

SentimentScope parse_scope(const std::string& name) {
    if (name == "matching_sentences") return SentimentScope::matching_sentences;
    if (name == "all_review_sentences") return SentimentScope::all_review_sentences;
    throw ValidationError("unknown sentiment scope '" + name + "'");
}

GradingOptions grading_options(const std::string& f, double epsilon, const std::string& scope) {
    GradingOptions opt;
    opt.variant = {parse_confine_kind(f), epsilon};
    opt.scope = parse_scope(scope);
    return opt;
}

PairedSample paired(const std::vector<double>& with, const std::vector<double>& without,
                    std::optional<std::vector<std::string>> labels) {
    PairedSample s;
    if (labels) {
        s.labels = *labels;
    } else {
        for (std::size_t i = 0; i < with.size(); ++i) s.labels.push_back(std::to_string(i));
    }
    s.with_condition = with;
    s.without_condition = without;
    return s;
}

Matrix to_matrix(const std::vector<std::vector<double>>& rows) {
    Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != m.cols()) throw ValidationError("ragged matrix");
        for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
    }
    return m;
}

std::vector<std::vector<double>> from_matrix(const Matrix& m) {
    std::vector<std::vector<double>> out(m.rows(), std::vector<double>(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Review mining: phrases, embeddings, issue grading and evaluation.";

    auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<IoError>(m, "IoError", error.ptr());
    auto validation = py::register_exception<ValidationError>(m, "ValidationError", error.ptr());
    py::register_exception<EmptyCorpusError>(m, "EmptyCorpusError", validation.ptr());
    py::register_exception<NotObservedError>(m, "NotObservedError", validation.ptr());
    py::register_exception<OovError>(m, "OovError", validation.ptr());
    py::register_exception<DegenerateSampleError>(m, "DegenerateSampleError", validation.ptr());
    py::register_exception<DependencyError>(m, "DependencyError", validation.ptr());

    // ---------------------------------------------------------------- corpus

    py::class_<RawReview>(m, "RawReview")
        .def(py::init([](std::string id, std::string app_id, int rating, std::string text,
                         std::optional<std::string> date) {
                 return RawReview{std::move(id), std::move(app_id), rating, std::move(text), std::move(date)};
             }),
             py::arg("id"), py::arg("app_id"), py::arg("rating"), py::arg("text"), py::arg("date") = py::none())
        .def_readwrite("id", &RawReview::id)
        .def_readwrite("app_id", &RawReview::app_id)
        .def_readwrite("rating", &RawReview::rating)
        .def_readwrite("text", &RawReview::text)
        .def_readwrite("date", &RawReview::date);

    py::class_<CleanReview>(m, "CleanReview")
        .def_readonly("id", &CleanReview::id)
        .def_readonly("app_id", &CleanReview::app_id)
        .def_readonly("rating", &CleanReview::rating)
        .def_readonly("sentences", &CleanReview::sentences)
        .def_readonly("token_count", &CleanReview::token_count)
        .def("__repr__", [](const CleanReview& r) { return "<CleanReview " + r.id + ">"; });

    py::class_<Corpus>(m, "Corpus")
        .def(py::init([](const std::vector<CleanReview>& reviews) { return Corpus(reviews, "<python>"); }),
             py::arg("reviews"))
        .def_property_readonly("reviews", &Corpus::reviews)
        .def_property_readonly("source_path", &Corpus::source_path)
        .def("__len__", &Corpus::review_count)
        .def("to_jsonl", [](const Corpus& c) { return write_clean_jsonl(c); });

    py::class_<Lemmatizer>(m, "Lemmatizer")
        .def(py::init<>())
        .def_static("builtin", &Lemmatizer::builtin)
        .def("add_exceptions", &Lemmatizer::add_exceptions, py::arg("table_text"))
        .def("lemmatize", &Lemmatizer::lemmatize, py::arg("word"));

    m.def("clean_text", &clean_text, py::arg("text"));
    m.def("split_sentences", &split_sentences, py::arg("text"));
    m.def("tokenize", &tokenize, py::arg("sentence"));

    m.def(
        "parse_reviews",
        [](const std::string& contents, const std::string& format) {
            auto r = parse_reviews(contents, parse_format(format));
            std::vector<std::pair<std::size_t, std::string>> rejected;
            for (const auto& j : r.rejected) rejected.emplace_back(j.record, j.reason);
            return py::make_tuple(r.corpus.reviews(), rejected);
        },
        py::arg("contents"), py::arg("format") = "jsonl",
        "Parse raw reviews; returns (reviews, [(record, reason), ...]) for malformed records.");

    m.def(
        "preprocess",
        [](const std::vector<RawReview>& reviews, std::optional<Lemmatizer> lemmatizer) {
            auto lem = lemmatizer ? *lemmatizer : Lemmatizer::builtin();
            return preprocess_corpus(RawCorpus(reviews, "<python>"), lem).corpus;
        },
        py::arg("reviews"), py::arg("lemmatizer") = py::none());

    m.def("read_clean_jsonl", [](const std::string& s) { return read_clean_jsonl(s); }, py::arg("contents"));
    m.def("load_clean_corpus", &load_clean_corpus, py::arg("path"));
    m.def("is_ad_token", &is_ad_token, py::arg("token"));
    m.def("filter_ad_reviews", &filter_ad_reviews, py::arg("corpus"));

    // ---------------------------------------------------------------- phrases

    py::class_<PhraseConfig>(m, "PhraseConfig")
        .def(py::init<>())
        .def_readwrite("pmi_threshold_2gram", &PhraseConfig::pmi_threshold_2gram)
        .def_readwrite("pmi_threshold_3gram", &PhraseConfig::pmi_threshold_3gram)
        .def_readwrite("min_count", &PhraseConfig::min_count)
        .def_readwrite("passes", &PhraseConfig::passes);

    py::class_<Phrase>(m, "Phrase")
        .def_property_readonly("text", [](const Phrase& p) { return term_text(p.tokens); })
        .def_readonly("tokens", &Phrase::tokens)
        .def_readonly("pmi", &Phrase::pmi)
        .def_readonly("count", &Phrase::count)
        .def("__repr__", [](const Phrase& p) {
            return "<Phrase '" + term_text(p.tokens) + "' pmi=" + format_fixed(p.pmi, 4) + ">";
        });

    m.def(
        "pmi",
        [](const Corpus& c, const std::string& w1, const std::string& w2) { return pmi(count_ngrams(c), w1, w2); },
        py::arg("corpus"), py::arg("w1"), py::arg("w2"));
    m.def(
        "mine_phrases",
        [](const Corpus& c, std::optional<PhraseConfig> config) {
            return mine_phrases(c, config.value_or(PhraseConfig{}), noun_predicate(NounLexicon::builtin()));
        },
        py::arg("corpus"), py::arg("config") = py::none());
    m.def(
        "merge_phrases",
        [](const Corpus& c, const std::vector<std::string>& phrases) { return merge_phrases(c, to_terms(phrases)); },
        py::arg("corpus"), py::arg("phrases"));

    // ---------------------------------------------------------------- embeddings

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("dim", &TrainConfig::dim)
        .def_readwrite("window", &TrainConfig::window)
        .def_readwrite("negative", &TrainConfig::negative)
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("initial_lr", &TrainConfig::initial_lr)
        .def_readwrite("min_count", &TrainConfig::min_count)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("subsample_threshold", &TrainConfig::subsample_threshold)
        .def_readwrite("workers", &TrainConfig::workers);

    py::class_<EmbeddingModel>(m, "EmbeddingModel")
        .def_property_readonly("dim", &EmbeddingModel::dim)
        .def_property_readonly("tokens", [](const EmbeddingModel& e) { return e.vocab().tokens(); })
        .def("__contains__", [](const EmbeddingModel& e, const std::string& t) { return e.vocab().contains(t); })
        .def("__len__", [](const EmbeddingModel& e) { return e.vocab().size(); })
        .def(
            "vector",
            [](const EmbeddingModel& e, const std::string& term) { return term_vector(e, parse_term(term)).vector; },
            py::arg("term"), "Vector of a token, merged phrase, or space-separated phrase (summed).")
        .def("to_word2vec", [](const EmbeddingModel& e) { return write_word2vec_text(e); });

    m.def(
        "train",
        [](const Corpus& c, std::optional<TrainConfig> config) {
            TrainResult r;
            {
                py::gil_scoped_release release;
                r = train_skipgram(c, config.value_or(TrainConfig{}));
            }
            return py::make_tuple(std::move(r.model), r.probe_loss);
        },
        py::arg("corpus"), py::arg("config") = py::none(), "Train skip-gram; returns (model, probe_loss).");
    m.def("read_word2vec", [](const std::string& s) { return read_word2vec_text(s); }, py::arg("contents"));
    m.def(
        "cosine_similarity",
        [](const std::vector<double>& u, const std::vector<double>& v) { return cosine_similarity(u, v); },
        py::arg("u"), py::arg("v"));
    m.def(
        "top_k",
        [](const EmbeddingModel& model, const std::vector<std::string>& seeds, std::size_t k,
           const std::vector<std::string>& denylist, const std::vector<std::string>& candidates) {
            auto deny = to_terms(denylist);
            auto hits = top_k_similar(model, to_terms(seeds), k, std::set<Term>(deny.begin(), deny.end()),
                                      to_terms(candidates));
            std::vector<std::pair<std::string, double>> out;
            for (const auto& h : hits) out.emplace_back(term_text(h.term), h.similarity);
            return out;
        },
        py::arg("model"), py::arg("seeds"), py::arg("k") = 50, py::arg("denylist") = std::vector<std::string>{},
        py::arg("candidates") = std::vector<std::string>{},
        "Terms closest to any seed as [(term, similarity)], seeds and denylist excluded.");

    // ---------------------------------------------------------------- sentiment and grading

    py::class_<Lexicon>(m, "Lexicon")
        .def_static("builtin", &Lexicon::builtin)
        .def_static("from_text", &Lexicon::from_text, py::arg("terms"), py::arg("boosters") = "",
                    py::arg("negations") = "")
        .def("strength", &Lexicon::strength, py::arg("token"))
        .def("__len__", &Lexicon::size);

    m.def("combine", &combine, py::arg("positive"), py::arg("negative"));
    m.def(
        "score_sentence",
        [](const Sentence& s, std::optional<Lexicon> lex) {
            auto r = score_sentence(s, lex ? *lex : Lexicon::builtin());
            return py::make_tuple(r.positive, r.negative, r.combined);
        },
        py::arg("tokens"), py::arg("lexicon") = py::none(), "Returns (positive, negative, combined).");

    py::class_<IssueSpec>(m, "IssueSpec")
        .def(py::init([](std::string name, const std::vector<std::string>& related,
                         const std::vector<std::string>& seeds) {
                 IssueSpec s{std::move(name), to_terms(seeds), to_terms(related)};
                 s.validate();
                 return s;
             }),
             py::arg("name"), py::arg("related_terms"), py::arg("seed_terms") = std::vector<std::string>{})
        .def_readonly("name", &IssueSpec::name)
        .def_property_readonly("related_terms", [](const IssueSpec& s) {
            std::vector<std::string> out;
            for (const auto& t : s.related_terms) out.push_back(term_text(t));
            return out;
        });
    m.def("parse_issue_specs", &parse_issue_specs, py::arg("json_text"));
    m.def(
        "normalize_spec",
        [](const IssueSpec& s, std::optional<Lemmatizer> lem) {
            return normalize_spec(s, lem ? *lem : Lemmatizer::builtin());
        },
        py::arg("spec"), py::arg("lemmatizer") = py::none());

    py::class_<IssueScore>(m, "IssueScore")
        .def_readonly("issue", &IssueScore::issue)
        .def_readonly("R", &IssueScore::R)
        .def_readonly("N", &IssueScore::N)
        .def_readonly("P", &IssueScore::P)
        .def_readonly("U", &IssueScore::U)
        .def_readonly("matched_review_ids", &IssueScore::matched_review_ids)
        .def("__repr__", [](const IssueScore& s) {
            return "<IssueScore " + s.issue + " U=" + format_fixed(s.U, 6) + " N=" + std::to_string(s.N) + ">";
        });

    m.def("concern_score",
          [](double R, double P, const std::string& f, double epsilon) {
              return concern_score(R, P, FVariant{parse_confine_kind(f), epsilon});
          },
          py::arg("R"), py::arg("P"), py::arg("f") = "soft_division", py::arg("epsilon") = 1e-3);

    auto grade_doc = "Score each issue; f is 'soft_division' or 'sigmoid'.";
    m.def(
        "grade",
        [](const Corpus& c, const std::vector<IssueSpec>& specs, std::optional<Lexicon> lex, const std::string& f,
           double epsilon, const std::string& scope) {
            return grade_issues(c, specs, lex ? *lex : Lexicon::builtin(), grading_options(f, epsilon, scope));
        },
        py::arg("corpus"), py::arg("specs"), py::arg("lexicon") = py::none(), py::arg("f") = "soft_division",
        py::arg("epsilon") = 1e-3, py::arg("scope") = "matching_sentences", grade_doc);
    m.def(
        "rank",
        [](const Corpus& c, const std::vector<IssueSpec>& specs, std::optional<Lexicon> lex, const std::string& f,
           double epsilon, const std::string& scope) {
            return rank_issues(c, specs, lex ? *lex : Lexicon::builtin(), grading_options(f, epsilon, scope));
        },
        py::arg("corpus"), py::arg("specs"), py::arg("lexicon") = py::none(), py::arg("f") = "soft_division",
        py::arg("epsilon") = 1e-3, py::arg("scope") = "matching_sentences", "Like grade, sorted by concern.");

    // ---------------------------------------------------------------- evaluation

    m.def(
        "ndcg",
        [](const std::vector<std::string>& predicted, const std::map<std::string, double>& truth,
           std::optional<std::size_t> k, const std::string& gain) {
            RankedList list;
            for (std::size_t i = 0; i < predicted.size(); ++i)
                list.items.push_back({predicted[i], static_cast<double>(predicted.size() - i)});
            Gain g;
            if (gain == "linear") g = Gain::linear;
            else if (gain == "exponential") g = Gain::exponential;
            else throw ValidationError("gain must be 'linear' or 'exponential'");
            return ndcg_at_k(list, truth, k.value_or(predicted.size()), g);
        },
        py::arg("predicted"), py::arg("truth"), py::arg("k") = py::none(), py::arg("gain") = "linear",
        "NDCG@k of labels in predicted order against {label: relevance}.");

    py::class_<TestResult>(m, "TestResult")
        .def_readonly("statistic", &TestResult::statistic)
        .def_readonly("p_value", &TestResult::p_value)
        .def_readonly("effect_size", &TestResult::effect_size)
        .def_readonly("interpretation", &TestResult::interpretation)
        .def("__repr__", [](const TestResult& r) { return "<TestResult " + to_json(r) + ">"; });

    py::class_<WilcoxonResult>(m, "WilcoxonResult")
        .def_readonly("result", &WilcoxonResult::result)
        .def_readonly("w_plus", &WilcoxonResult::w_plus)
        .def_readonly("w_minus", &WilcoxonResult::w_minus)
        .def_readonly("n_used", &WilcoxonResult::n_used)
        .def_readonly("z", &WilcoxonResult::z);

    m.def("pearson", &pearson, py::arg("x"), py::arg("y"));
    m.def("spearman", &spearman, py::arg("x"), py::arg("y"));
    m.def("shapiro_wilk", &shapiro_wilk, py::arg("x"));
    m.def(
        "paired_t_test",
        [](const std::vector<double>& w, const std::vector<double>& wo, std::optional<std::vector<std::string>> l) {
            return paired_t_test(paired(w, wo, std::move(l)));
        },
        py::arg("with_condition"), py::arg("without_condition"), py::arg("labels") = py::none());
    m.def(
        "wilcoxon",
        [](const std::vector<double>& w, const std::vector<double>& wo, std::optional<std::vector<std::string>> l) {
            return wilcoxon_signed_rank(paired(w, wo, std::move(l)));
        },
        py::arg("with_condition"), py::arg("without_condition"), py::arg("labels") = py::none());
    m.def("a12", &vargha_delaney_a12, py::arg("a"), py::arg("b"));
    m.def(
        "increase_rates",
        [](const std::vector<double>& w, const std::vector<double>& wo, std::optional<std::vector<std::string>> l) {
            auto s = increase_rate_summary(paired(w, wo, std::move(l)));
            return py::make_tuple(s.mean, s.stdev, s.per_label);
        },
        py::arg("with_condition"), py::arg("without_condition"), py::arg("labels") = py::none(),
        "Returns (mean, stdev, per_label).");

    // ---------------------------------------------------------------- visualization

    m.def(
        "mds",
        [](const std::vector<std::vector<double>>& distances, std::size_t dims) {
            auto r = classical_mds(to_matrix(distances), dims);
            return py::make_tuple(from_matrix(r.coordinates), r.stress);
        },
        py::arg("distances"), py::arg("dims") = 2, "Classical MDS; returns (coordinates, stress).");

    py::class_<StyleConfig>(m, "StyleConfig")
        .def(py::init<>())
        .def_readwrite("width", &StyleConfig::width)
        .def_readwrite("height", &StyleConfig::height)
        .def_readwrite("r_min", &StyleConfig::r_min)
        .def_readwrite("r_max", &StyleConfig::r_max)
        .def_readwrite("margin", &StyleConfig::margin)
        .def_readwrite("resolve_overlaps", &StyleConfig::resolve_overlaps)
        .def_readwrite("font_family", &StyleConfig::font_family);

    m.def(
        "render_bubbles",
        [](const std::vector<std::pair<std::string, std::vector<double>>>& vectors,
           const std::map<std::string, double>& concerns, const std::map<std::string, std::string>& groups,
           std::optional<StyleConfig> style) {
            std::vector<TermVector> terms;
            for (const auto& [t, v] : vectors) terms.push_back({parse_term(t), v});
            auto out = render(layout_bubbles(terms, groups), concerns, style.value_or(StyleConfig{}));
            return py::make_tuple(out.svg, out.json, out.placed.stress);
        },
        py::arg("vectors"), py::arg("concerns"), py::arg("groups") = std::map<std::string, std::string>{},
        py::arg("style") = py::none(), "Bubble chart from [(term, vector)]; returns (svg, json, stress).");

    // ---------------------------------------------------------------- command line

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int code;
            {
                py::gil_scoped_release release;
                code = cli::run_cli(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Run a rankminer subcommand; returns (exit_code, stdout, stderr).");
}
