#include "cli.hpp"

#include "rankminer/bubbleviz.hpp"
#include "rankminer/corpus.hpp"
#include "rankminer/error.hpp"
#include "rankminer/evalstats.hpp"
#include "rankminer/lemmatizer.hpp"
#include "rankminer/resources.hpp"
#include "rankminer/sentiment.hpp"
#include "rankminer/text.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace rankminer::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------- config

namespace {

void reject_unknown(const json& obj, std::initializer_list<std::string_view> known, const std::string& where) {
    for (const auto& [key, _] : obj.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ValidationError("unknown config key '" + where + key + "'");
    }
}

template <class T>
void read_key(const json& obj, const char* key, T& dst, const std::string& where) {
    if (!obj.contains(key)) return;
    try {
        dst = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError("config key '" + where + key + "' has the wrong type");
    }
}

std::string resolve(const std::string& base, const std::string& p) {
    fs::path path(p);
    if (path.is_absolute() || base.empty() || base == ".") return p;
    return (fs::path(base) / path).lexically_normal().string();
}

void read_path(const json& obj, const char* key, std::optional<std::string>& dst, const std::string& base) {
    if (!obj.contains(key)) return;
    if (obj.at(key).is_null()) return;
    if (!obj.at(key).is_string()) throw ValidationError(std::string("config key 'paths.") + key + "' must be a string");
    dst = resolve(base, obj.at(key).get<std::string>());
}

SentimentScope parse_scope(std::string_view name) {
    if (name == "matching_sentences") return SentimentScope::matching_sentences;
    if (name == "all_review_sentences") return SentimentScope::all_review_sentences;
    throw ValidationError("unknown sentiment scope '" + std::string(name) +
                          "' (expected matching_sentences or all_review_sentences)");
}

std::string scope_name(SentimentScope s) {
    return s == SentimentScope::matching_sentences ? "matching_sentences" : "all_review_sentences";
}

} // namespace

PipelineConfig parse_pipeline_config(std::string_view json_text, const std::string& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ValidationError("config must be a JSON object");
    reject_unknown(doc, {"paths", "phrases", "train", "grading", "k", "seed"}, "");

    PipelineConfig cfg;
    read_key(doc, "k", cfg.k, "");
    read_key(doc, "seed", cfg.seed, "");

    if (doc.contains("paths")) {
        const auto& p = doc.at("paths");
        if (!p.is_object()) throw ValidationError("config key 'paths' must be an object");
        reject_unknown(p,
                       {"corpus", "clean_corpus", "lemma_table", "sentiment_lexicon", "booster_words",
                        "negation_words", "noun_lexicon", "stop_words", "denylist", "issue_specs", "labels",
                        "output_dir"},
                       "paths.");
        read_path(p, "corpus", cfg.paths.corpus, base_dir);
        read_path(p, "clean_corpus", cfg.paths.clean_corpus, base_dir);
        read_path(p, "lemma_table", cfg.paths.lemma_table, base_dir);
        read_path(p, "sentiment_lexicon", cfg.paths.sentiment_lexicon, base_dir);
        read_path(p, "booster_words", cfg.paths.booster_words, base_dir);
        read_path(p, "negation_words", cfg.paths.negation_words, base_dir);
        read_path(p, "noun_lexicon", cfg.paths.noun_lexicon, base_dir);
        read_path(p, "stop_words", cfg.paths.stop_words, base_dir);
        read_path(p, "denylist", cfg.paths.denylist, base_dir);
        read_path(p, "issue_specs", cfg.paths.issue_specs, base_dir);
        read_path(p, "labels", cfg.paths.labels, base_dir);
        std::optional<std::string> out;
        read_path(p, "output_dir", out, base_dir);
        if (out) cfg.paths.output_dir = *out;
        else cfg.paths.output_dir = base_dir.empty() ? "." : base_dir;
    } else {
        cfg.paths.output_dir = base_dir.empty() ? "." : base_dir;
    }

    if (doc.contains("phrases")) {
        const auto& p = doc.at("phrases");
        reject_unknown(p, {"pmi_threshold_2gram", "pmi_threshold_3gram", "min_count", "passes"}, "phrases.");
        read_key(p, "pmi_threshold_2gram", cfg.phrases.pmi_threshold_2gram, "phrases.");
        read_key(p, "pmi_threshold_3gram", cfg.phrases.pmi_threshold_3gram, "phrases.");
        read_key(p, "min_count", cfg.phrases.min_count, "phrases.");
        read_key(p, "passes", cfg.phrases.passes, "phrases.");
    }
    if (doc.contains("train")) {
        const auto& t = doc.at("train");
        reject_unknown(t,
                       {"dim", "window", "negative", "epochs", "initial_lr", "min_count", "subsample_threshold",
                        "workers"},
                       "train.");
        read_key(t, "dim", cfg.train.dim, "train.");
        read_key(t, "window", cfg.train.window, "train.");
        read_key(t, "negative", cfg.train.negative, "train.");
        read_key(t, "epochs", cfg.train.epochs, "train.");
        read_key(t, "initial_lr", cfg.train.initial_lr, "train.");
        read_key(t, "min_count", cfg.train.min_count, "train.");
        read_key(t, "subsample_threshold", cfg.train.subsample_threshold, "train.");
        read_key(t, "workers", cfg.train.workers, "train.");
    }
    if (doc.contains("grading")) {
        const auto& g = doc.at("grading");
        reject_unknown(g, {"f", "epsilon", "sentiment_scope", "ads_only"}, "grading.");
        std::string f = to_string(cfg.f.kind);
        read_key(g, "f", f, "grading.");
        cfg.f.kind = parse_confine_kind(f);
        read_key(g, "epsilon", cfg.f.epsilon, "grading.");
        std::string scope = scope_name(cfg.scope);
        read_key(g, "sentiment_scope", scope, "grading.");
        cfg.scope = parse_scope(scope);
        read_key(g, "ads_only", cfg.ads_only, "grading.");
    }
    cfg.phrases.validate();
    cfg.f.validate();
    if (cfg.k == 0) throw ValidationError("config key 'k' must be positive");
    return cfg;
}

PipelineConfig load_pipeline_config(const std::string& path) {
    auto text = read_file(path);
    auto base = fs::path(path).parent_path().string();
    return parse_pipeline_config(text, base.empty() ? "." : base);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stage) {
    // FNV-1a over the stage name, mixed into the seed with splitmix64.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : stage) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::uint64_t z = seed ^ h;
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// ---------------------------------------------------------------- stages

namespace {

constexpr const char* kKeywordsHeader = "# rankminer keywords v1";
constexpr const char* kCorrelationFormat = "rankminer.correlation";
constexpr const char* kTestsFormat = "rankminer.significance-tests";
constexpr const char* kNdcgFormat = "rankminer.ndcg";

struct Context {
    PipelineConfig cfg;
    std::ostream& out;
};

std::string artifact(const PipelineConfig& cfg, const std::string& name) {
    return (fs::path(cfg.paths.output_dir) / name).string();
}

void write_artifact(const std::string& path, std::string_view contents) {
    auto parent = fs::path(path).parent_path();
    if (!parent.empty()) {
        std::error_code ec;
        fs::create_directories(parent, ec);
        if (ec) throw IoError("cannot create directory '" + parent.string() + "': " + ec.message());
    }
    write_file(path, contents);
}

std::string pick(const std::optional<std::string>& flag, const std::optional<std::string>& config,
                 const std::string& fallback) {
    if (flag) return *flag;
    if (config) return *config;
    return fallback;
}

std::string require(const std::optional<std::string>& flag, const std::optional<std::string>& config,
                    const std::string& key, const std::string& flag_name) {
    if (flag) return *flag;
    if (config) return *config;
    throw ValidationError("missing config key '" + key + "' (or pass " + flag_name + ")");
}

// Input produced by an earlier stage; absence is a stage-order violation.
std::string require_stage_output(const std::string& path, const std::string& producer) {
    if (!fs::exists(path))
        throw DependencyError("'" + path + "' does not exist; run `rankminer " + producer + "` first");
    return path;
}

Lemmatizer make_lemmatizer(const PipelineConfig& cfg) {
    auto lem = Lemmatizer::builtin();
    if (cfg.paths.lemma_table) lem.add_exceptions(read_file(*cfg.paths.lemma_table));
    return lem;
}

Lexicon make_lexicon(const PipelineConfig& cfg) {
    const auto& p = cfg.paths;
    if (!p.sentiment_lexicon && !p.booster_words && !p.negation_words) return Lexicon::builtin();
    auto terms = p.sentiment_lexicon ? read_file(*p.sentiment_lexicon) : std::string(resources::sentiment_lexicon());
    auto boosters = p.booster_words ? read_file(*p.booster_words) : std::string(resources::booster_words());
    auto negations = p.negation_words ? read_file(*p.negation_words) : std::string(resources::negation_words());
    return Lexicon::from_text(terms, boosters, negations);
}

NounLexicon make_nouns(const PipelineConfig& cfg) {
    const auto& p = cfg.paths;
    if (!p.noun_lexicon && !p.stop_words) return NounLexicon::builtin();
    auto nouns = p.noun_lexicon ? read_file(*p.noun_lexicon) : std::string(resources::noun_lexicon());
    auto stops = p.stop_words ? read_file(*p.stop_words) : std::string(resources::stop_words());
    return NounLexicon::from_text(nouns, stops);
}

bool is_clean_corpus(const std::string& contents) {
    auto nl = contents.find('\n');
    auto first = std::string_view(contents).substr(0, nl);
    return first.find("rankminer.clean-corpus") != std::string_view::npos;
}

// Accepts either a preprocessed corpus or raw reviews, which are
// preprocessed on the fly.
Corpus load_any_corpus(const std::string& path, const PipelineConfig& cfg) {
    auto contents = read_file(path);
    if (is_clean_corpus(contents)) return read_clean_jsonl(contents, path);
    auto raw = parse_reviews(contents, format_from_path(path), path);
    return preprocess_corpus(raw.corpus, make_lemmatizer(cfg)).corpus;
}

std::string default_corpus(const PipelineConfig& cfg) {
    if (cfg.paths.clean_corpus) return *cfg.paths.clean_corpus;
    auto produced = artifact(cfg, "clean.jsonl");
    if (fs::exists(produced)) return produced;
    if (cfg.paths.corpus) return *cfg.paths.corpus;
    throw ValidationError("missing config key 'paths.corpus' (or pass --corpus)");
}

std::string preview(const std::vector<std::string>& items, std::size_t n) {
    std::vector<std::string> head(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(std::min(n, items.size())));
    return join(head, ", ");
}

std::vector<IssueSpec> load_specs(const std::string& path, const Lemmatizer& lem) {
    auto specs = parse_issue_specs(read_file(path));
    for (auto& s : specs) s = normalize_spec(s, lem);
    return specs;
}

std::vector<Term> parse_term_list(const std::string& csv) {
    std::vector<Term> terms;
    for (const auto& part : split(csv, ',')) {
        auto t = parse_term(part);
        if (!t.empty()) terms.push_back(std::move(t));
    }
    return terms;
}

// Keywords artifact: rank, term, similarity.
std::string write_keywords(const std::vector<ScoredTerm>& terms) {
    std::string out = std::string(kKeywordsHeader) + "\nrank\tterm\tsimilarity\n";
    for (std::size_t i = 0; i < terms.size(); ++i)
        out += std::to_string(i + 1) + '\t' + term_text(terms[i].term) + '\t' + format_fixed(terms[i].similarity, 6) +
               '\n';
    return out;
}

std::vector<Term> read_keywords(const std::string& contents) {
    if (contents.rfind(kKeywordsHeader, 0) != 0) throw ValidationError("not a keywords file (missing header)");
    std::vector<Term> terms;
    for (const auto& line : content_lines(contents)) {
        if (line.rfind("rank\t", 0) == 0) continue;
        auto cols = split(line, '\t');
        if (cols.size() != 3) throw ValidationError("malformed keywords line: " + line);
        terms.push_back(parse_term(cols[1]));
    }
    return terms;
}

ordered_json result_json(const TestResult& r) { return ordered_json::parse(to_json(r)); }

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

double parse_number(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ValidationError("invalid number '" + s + "' in " + what);
    }
}

// ---- preprocess

void cmd_preprocess(Context& ctx, const std::optional<std::string>& in, const std::optional<std::string>& out,
                    const std::optional<std::string>& format) {
    auto input = require(in, ctx.cfg.paths.corpus, "paths.corpus", "--in");
    auto output = pick(out, ctx.cfg.paths.clean_corpus, artifact(ctx.cfg, "clean.jsonl"));
    InputFormat fmt = format_from_path(input);
    if (format) {
        if (*format == "jsonl") fmt = InputFormat::jsonl;
        else if (*format == "csv") fmt = InputFormat::csv;
        else throw ValidationError("unknown input format '" + *format + "' (expected jsonl or csv)");
    }
    auto ingested = ingest(input, fmt);
    auto result = preprocess_corpus(ingested.corpus, make_lemmatizer(ctx.cfg));
    write_artifact(output, write_clean_jsonl(result.corpus));
    ctx.out << "kept " << result.corpus.review_count() << " / " << result.input_count << " reviews";
    if (!ingested.rejected.empty()) ctx.out << " (" << ingested.rejected.size() << " malformed records skipped)";
    ctx.out << " -> " << output << "\n";
}

// ---- filter-ads

void cmd_filter_ads(Context& ctx, const std::optional<std::string>& in, const std::optional<std::string>& out) {
    auto input = in ? *in : default_corpus(ctx.cfg);
    auto output = pick(out, std::nullopt, artifact(ctx.cfg, "ads.jsonl"));
    auto corpus = load_any_corpus(input, ctx.cfg);
    auto ads = filter_ad_reviews(corpus);
    write_artifact(output, write_clean_jsonl(ads));
    ctx.out << "kept " << ads.review_count() << " / " << corpus.review_count() << " reviews mentioning ads -> "
            << output << "\n";
}

// ---- phrases

void cmd_phrases(Context& ctx, const std::optional<std::string>& in, const std::optional<std::string>& out) {
    auto input = in ? *in : default_corpus(ctx.cfg);
    auto output = pick(out, std::nullopt, artifact(ctx.cfg, "phrases.tsv"));
    auto corpus = load_any_corpus(input, ctx.cfg);
    auto nouns = make_nouns(ctx.cfg);
    auto phrases = mine_phrases(corpus, ctx.cfg.phrases, noun_predicate(nouns));
    write_artifact(output, write_phrase_tsv(phrases));
    std::size_t bigrams = 0;
    std::vector<std::string> names;
    for (const auto& p : phrases) {
        if (p.tokens.size() == 2) ++bigrams;
        names.push_back(term_text(p.tokens));
    }
    ctx.out << "mined " << phrases.size() << " phrases (" << bigrams << " 2-grams, " << phrases.size() - bigrams
            << " 3-grams)";
    if (!names.empty()) ctx.out << "; top: " << preview(names, 3);
    ctx.out << " -> " << output << "\n";
}

// ---- train

void cmd_train(Context& ctx, const std::optional<std::string>& in, const std::optional<std::string>& phrases_path,
               const std::optional<std::string>& out) {
    auto input = in ? *in : default_corpus(ctx.cfg);
    auto output = pick(out, std::nullopt, artifact(ctx.cfg, "model.txt"));
    auto corpus = load_any_corpus(input, ctx.cfg);

    // Phrases are merged into single tokens so they get native vectors.
    std::string ppath = phrases_path ? *phrases_path : artifact(ctx.cfg, "phrases.tsv");
    std::size_t merged = 0;
    if (phrases_path || fs::exists(ppath)) {
        auto phrases = read_phrase_tsv(read_file(ppath));
        std::vector<Term> terms;
        for (const auto& p : phrases) terms.push_back(p.tokens);
        merged = terms.size();
        if (!terms.empty()) corpus = merge_phrases(corpus, terms);
    }

    auto tc = ctx.cfg.train;
    tc.seed = derive_seed(ctx.cfg.seed, "train");
    auto result = train_skipgram(corpus, tc);
    write_artifact(output, write_word2vec_text(result.model));
    ctx.out << "trained " << result.model.vocab().size() << " tokens x " << result.model.dim() << " dims ("
            << merged << " phrases merged), probe loss " << format_fixed(result.probe_loss.front(), 4) << " -> "
            << format_fixed(result.probe_loss.back(), 4);
    if (tc.workers > 1) ctx.out << " [" << tc.workers << " workers, not reproducible]";
    ctx.out << " -> " << output << "\n";
}

// ---- keywords

void cmd_keywords(Context& ctx, const std::string& seeds_arg, const std::optional<std::string>& model_path,
                  const std::optional<std::string>& phrases_path, const std::optional<std::string>& denylist_path,
                  const std::optional<std::string>& out, const std::optional<std::string>& spec_out,
                  const std::string& issue_name, bool raw_seeds) {
    auto mpath = require_stage_output(pick(model_path, std::nullopt, artifact(ctx.cfg, "model.txt")), "train");
    auto output = pick(out, std::nullopt, artifact(ctx.cfg, "keywords.tsv"));
    auto model = read_word2vec_text(read_file(mpath));

    auto seeds = parse_term_list(seeds_arg);
    if (seeds.empty()) throw ValidationError("--seeds needs at least one term");
    if (!raw_seeds) {
        // Seeds go through the same normalization as the corpus ("ads" -> "ad").
        IssueSpec probe{"seeds", {}, seeds};
        seeds = normalize_spec(probe, make_lemmatizer(ctx.cfg)).related_terms;
    }

    std::set<Term> denylist;
    if (auto d = denylist_path ? denylist_path : ctx.cfg.paths.denylist) denylist = parse_denylist(read_file(*d));

    std::vector<Term> extra;
    std::string ppath = phrases_path ? *phrases_path : artifact(ctx.cfg, "phrases.tsv");
    if (phrases_path || fs::exists(ppath))
        for (const auto& p : read_phrase_tsv(read_file(ppath))) extra.push_back(p.tokens);

    auto top = top_k_similar(model, seeds, ctx.cfg.k, denylist, extra);
    write_artifact(output, write_keywords(top));
    if (spec_out) {
        IssueSpec spec{issue_name, seeds, {}};
        for (const auto& t : top) spec.related_terms.push_back(t.term);
        spec.related_terms.insert(spec.related_terms.begin(), seeds.begin(), seeds.end());
        write_artifact(*spec_out, write_issue_specs({spec}));
    }
    std::vector<std::string> names;
    for (const auto& t : top) names.push_back(term_text(t.term));
    ctx.out << "retrieved " << top.size() << " terms";
    if (!names.empty()) ctx.out << "; top: " << preview(names, 5);
    ctx.out << " -> " << output << "\n";
}

// ---- grade / rank

struct GradeInputs {
    std::optional<std::string> corpus;
    std::optional<std::string> issues;
    std::optional<std::string> out;
    std::optional<std::string> f;
    std::optional<double> epsilon;
    std::optional<std::string> scope;
    bool ads_only = false;
    bool performance_issues = false;
};

GradingOptions grading_options(const PipelineConfig& cfg, const GradeInputs& in) {
    GradingOptions opt;
    opt.variant = cfg.f;
    if (in.f) opt.variant.kind = parse_confine_kind(*in.f);
    if (in.epsilon) opt.variant.epsilon = *in.epsilon;
    opt.variant.validate();
    opt.scope = in.scope ? parse_scope(*in.scope) : cfg.scope;
    return opt;
}

std::vector<IssueScore> grade_stage(Context& ctx, const GradeInputs& in, GradingOptions& opt, std::size_t& reviews) {
    auto corpus = load_any_corpus(in.corpus ? *in.corpus : default_corpus(ctx.cfg), ctx.cfg);
    if (in.ads_only || ctx.cfg.ads_only) corpus = filter_ad_reviews(corpus);
    if (corpus.empty()) throw EmptyCorpusError("no reviews left to grade");
    auto lem = make_lemmatizer(ctx.cfg);
    std::vector<IssueSpec> specs;
    if (in.performance_issues) {
        specs = parse_issue_specs(resources::performance_issues());
        for (auto& s : specs) s = normalize_spec(s, lem);
    } else {
        specs = load_specs(require(in.issues, ctx.cfg.paths.issue_specs, "paths.issue_specs", "--issues"), lem);
    }
    opt = grading_options(ctx.cfg, in);
    reviews = corpus.review_count();
    return grade_issues(corpus, specs, make_lexicon(ctx.cfg), opt);
}

std::string json_sibling(const std::string& path) {
    fs::path p(path);
    return p.replace_extension(".json").string();
}

void cmd_grade(Context& ctx, const GradeInputs& in) {
    GradingOptions opt;
    std::size_t reviews = 0;
    auto scores = grade_stage(ctx, in, opt, reviews);
    auto output = pick(in.out, std::nullopt, artifact(ctx.cfg, "scores.json"));
    write_artifact(output, issue_scores_json(scores, opt));
    std::size_t matched = 0;
    for (const auto& s : scores) matched += s.N > 0;
    ctx.out << "graded " << scores.size() << " issues over " << reviews << " reviews (" << matched
            << " with matches) -> " << output << "\n";
}

void cmd_rank(Context& ctx, const GradeInputs& in) {
    GradingOptions opt;
    std::size_t reviews = 0;
    auto scores = grade_stage(ctx, in, opt, reviews);
    sort_by_concern(scores);
    auto output = pick(in.out, std::nullopt, artifact(ctx.cfg, "ranking.tsv"));
    write_artifact(output, issue_scores_tsv(scores));
    write_artifact(json_sibling(output), issue_scores_json(scores, opt));
    std::vector<std::string> names;
    for (const auto& s : scores) names.push_back(s.issue);
    ctx.out << "ranked " << scores.size() << " issues over " << reviews << " reviews: " << join(names, " > ")
            << " -> " << output << "\n";
}

// ---- eval-ndcg

RankedList read_predicted(const std::string& path) {
    auto contents = read_file(path);
    RankedList list;
    auto first = trim(contents);
    if (!first.empty() && first.front() == '{') {
        for (const auto& s : read_issue_scores_json(contents)) list.items.push_back({s.issue, s.U});
    } else {
        if (contents.rfind("# rankminer issue-scores v1", 0) != 0)
            throw ValidationError("'" + path + "' is not a ranking file (missing header)");
        for (const auto& line : content_lines(contents)) {
            if (line.rfind("rank\t", 0) == 0) continue;
            auto cols = split(line, '\t');
            if (cols.size() != 6) throw ValidationError("malformed ranking line: " + line);
            list.items.push_back({cols[1], parse_number(cols[2], path)});
        }
    }
    list.validate();
    return list;
}

std::map<std::string, double> read_truth(const std::string& path) {
    std::map<std::string, double> truth;
    for (const auto& line : content_lines(read_file(path))) {
        auto cols = split(line, '\t');
        if (cols.size() != 2) throw ValidationError("ground-truth lines must be 'label<TAB>score': " + line);
        auto label = std::string(trim(cols[0]));
        if (!truth.emplace(label, parse_number(std::string(trim(cols[1])), path)).second)
            throw ValidationError("duplicate ground-truth label '" + label + "'");
    }
    if (truth.empty()) throw ValidationError("ground-truth file '" + path + "' is empty");
    return truth;
}

void cmd_eval_ndcg(Context& ctx, const std::optional<std::string>& predicted, const std::string& truth_path,
                   std::optional<std::size_t> k, const std::string& gain_name, const std::optional<std::string>& out) {
    auto ppath = require_stage_output(pick(predicted, std::nullopt, artifact(ctx.cfg, "ranking.tsv")), "rank");
    auto list = read_predicted(ppath);
    auto truth = read_truth(truth_path);
    Gain gain;
    if (gain_name == "linear") gain = Gain::linear;
    else if (gain_name == "exponential") gain = Gain::exponential;
    else throw ValidationError("unknown gain '" + gain_name + "' (expected linear or exponential)");
    std::size_t kk = k ? *k : list.items.size();
    double v = ndcg_at_k(list, truth, kk, gain);
    auto output = pick(out, std::nullopt, artifact(ctx.cfg, "ndcg.json"));
    ordered_json j;
    j["format"] = kNdcgFormat;
    j["version"] = 1;
    j["k"] = kk;
    j["gain"] = gain_name;
    j["ndcg"] = v;
    write_artifact(output, dump(j));
    ctx.out << "NDCG@" << kk << " = " << format_fixed(v, 6) << " -> " << output << "\n";
}

// ---- correlate

void cmd_correlate(Context& ctx, const std::string& in, const std::optional<std::string>& out) {
    auto rows = parse_csv(read_file(in));
    if (rows.empty()) throw ValidationError("'" + in + "' is empty");
    const auto& header = rows.front();
    auto col = [&](const std::string& name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (trim(header[i]) == name) return i;
        return std::nullopt;
    };
    auto cl = col("label"), cx = col("x"), cy = col("y"), cg = col("group");
    if (!cl || !cx || !cy) throw ValidationError("correlation CSV needs columns label, x, y (group optional)");

    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> groups;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() == 1 && trim(row[0]).empty()) continue;
        if (row.size() != header.size()) throw ValidationError("row " + std::to_string(r + 1) + " has wrong arity");
        std::string g = cg ? std::string(trim(row[*cg])) : "all";
        groups[g].first.push_back(parse_number(std::string(trim(row[*cx])), in));
        groups[g].second.push_back(parse_number(std::string(trim(row[*cy])), in));
    }
    if (groups.empty()) throw ValidationError("'" + in + "' has no data rows");

    ordered_json j;
    j["format"] = kCorrelationFormat;
    j["version"] = 1;
    ordered_json res = ordered_json::object();
    std::vector<std::string> summary;
    for (const auto& [g, xy] : groups) {
        auto p = pearson(xy.first, xy.second);
        auto s = spearman(xy.first, xy.second);
        ordered_json entry;
        entry["n"] = xy.first.size();
        entry["pearson"] = result_json(p);
        entry["spearman"] = result_json(s);
        res[g] = entry;
        summary.push_back(g + ": PCC " + format_fixed(p.statistic, 3) + " (p=" + format_general(p.p_value, 3) +
                          "), SRC " + format_fixed(s.statistic, 3) + " (p=" + format_general(s.p_value, 3) + ")");
    }
    j["groups"] = res;
    auto output = pick(out, std::nullopt, artifact(ctx.cfg, "correlation.json"));
    write_artifact(output, dump(j));
    ctx.out << join(summary, "; ") << " -> " << output << "\n";
}

// ---- tests

template <class F>
ordered_json guarded(F&& f) {
    try {
        return f();
    } catch (const ValidationError& e) {
        ordered_json skipped;
        skipped["skipped"] = e.what();
        return skipped;
    }
}

void cmd_tests(Context& ctx, const std::string& in, const std::optional<std::string>& out) {
    auto samples = read_measurements_csv(read_file(in));
    ordered_json j;
    j["format"] = kTestsFormat;
    j["version"] = 1;
    ordered_json res = ordered_json::object();
    std::vector<std::string> summary;
    for (const auto& [type, sample] : samples) {
        sample.validate();
        std::vector<double> diff(sample.with_condition.size());
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = sample.with_condition[i] - sample.without_condition[i];

        ordered_json entry;
        entry["n"] = sample.labels.size();
        entry["increase_rate"] = guarded([&] {
            auto r = increase_rate_summary(sample);
            ordered_json o;
            o["mean"] = r.mean;
            o["stdev"] = r.stdev;
            return o;
        });
        entry["shapiro_wilk"] = guarded([&] { return result_json(shapiro_wilk(diff)); });
        entry["paired_t"] = guarded([&] { return result_json(paired_t_test(sample)); });
        entry["wilcoxon"] = guarded([&] {
            auto w = wilcoxon_signed_rank(sample);
            auto o = result_json(w.result);
            o["w_plus"] = w.w_plus;
            o["w_minus"] = w.w_minus;
            o["n_used"] = w.n_used;
            o["z"] = w.z;
            return o;
        });
        entry["a12"] = guarded([&] { return result_json(vargha_delaney_a12(sample.with_condition, sample.without_condition)); });
        std::string line = type + " n=" + std::to_string(sample.labels.size());
        if (entry["increase_rate"].contains("mean"))
            line += " increase " + format_fixed(100.0 * entry["increase_rate"]["mean"].get<double>(), 2) + "%";
        if (entry["paired_t"].contains("p_value"))
            line += " t-test p=" + format_general(entry["paired_t"]["p_value"].get<double>(), 3);
        summary.push_back(line);
        res[type] = entry;
    }
    j["cost_types"] = res;
    auto output = pick(out, std::nullopt, artifact(ctx.cfg, "tests.json"));
    write_artifact(output, dump(j));
    ctx.out << join(summary, "; ") << " -> " << output << "\n";
}

// ---- viz

std::map<std::string, double> read_concerns(const std::string& path) {
    std::map<std::string, double> out;
    for (const auto& line : content_lines(read_file(path))) {
        auto cols = split(line, '\t');
        if (cols.size() != 2) throw ValidationError("concern lines must be 'term<TAB>concern': " + line);
        out[term_text(parse_term(cols[0]))] = parse_number(std::string(trim(cols[1])), path);
    }
    return out;
}

struct VizInputs {
    std::optional<std::string> model;
    std::optional<std::string> keywords;
    std::optional<std::string> concerns;
    std::optional<std::string> corpus;
    std::optional<std::string> labels;
    std::optional<std::string> out;
    std::optional<std::string> json_out;
    StyleConfig style;
};

void cmd_viz(Context& ctx, const VizInputs& in) {
    auto mpath = require_stage_output(pick(in.model, std::nullopt, artifact(ctx.cfg, "model.txt")), "train");
    auto kpath = require_stage_output(pick(in.keywords, std::nullopt, artifact(ctx.cfg, "keywords.tsv")), "keywords");
    auto model = read_word2vec_text(read_file(mpath));
    auto terms = read_keywords(read_file(kpath));
    if (terms.size() < 2) throw ValidationError("need at least two keywords to lay out");

    std::map<std::string, double> concerns;
    if (in.concerns) {
        concerns = read_concerns(*in.concerns);
    } else {
        // Each keyword is graded as its own single-term issue.
        auto corpus = load_any_corpus(in.corpus ? *in.corpus : default_corpus(ctx.cfg), ctx.cfg);
        if (ctx.cfg.ads_only) corpus = filter_ad_reviews(corpus);
        std::vector<IssueSpec> specs;
        for (const auto& t : terms) specs.push_back({term_text(t), {}, {t}});
        GradingOptions opt;
        opt.variant = ctx.cfg.f;
        opt.scope = ctx.cfg.scope;
        for (const auto& s : grade_issues(corpus, specs, make_lexicon(ctx.cfg), opt)) concerns[s.issue] = s.U;
    }

    std::vector<TermVector> vectors;
    for (const auto& t : terms) vectors.push_back(term_vector(model, t));
    std::map<std::string, std::string> groups;
    if (auto l = in.labels ? in.labels : ctx.cfg.paths.labels) groups = parse_labels(read_file(*l));

    auto layout = layout_bubbles(vectors, groups);
    auto rendered = render(layout, concerns, in.style);
    auto output = pick(in.out, std::nullopt, artifact(ctx.cfg, "bubbles.svg"));
    auto json_path = in.json_out ? *in.json_out : json_sibling(output);
    write_artifact(output, rendered.svg);
    write_artifact(json_path, rendered.json);
    ctx.out << "placed " << rendered.placed.bubbles.size() << " bubbles, stress "
            << format_fixed(rendered.placed.stress, 4) << " -> " << output << "\n";
}

// ---------------------------------------------------------------- parser

struct Common {
    std::optional<std::string> config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "Pipeline config (JSON)");
    sub->add_option("--seed", c.seed, "Top-level seed; stage seeds derive from it");
    sub->add_option("--output-dir", c.output_dir, "Directory for default artifact paths");
}

PipelineConfig resolve_config(const Common& c) {
    PipelineConfig cfg = c.config ? load_pipeline_config(*c.config) : PipelineConfig{};
    if (c.seed) cfg.seed = *c.seed;
    if (c.output_dir) cfg.paths.output_dir = *c.output_dir;
    return cfg;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Mine, grade and rank issues in app-store reviews", "rankminer"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "rankminer 1.0.0");

    Common common;
    std::function<void(Context&)> action;

    // preprocess
    std::optional<std::string> pp_in, pp_out, pp_format;
    auto* pp = app.add_subcommand("preprocess", "Clean, sentence-split, tokenize and lemmatize raw reviews");
    add_common(pp, common);
    pp->add_option("--in", pp_in, "Raw reviews (.jsonl or .csv)");
    pp->add_option("--out", pp_out, "Preprocessed corpus (JSONL)");
    pp->add_option("--format", pp_format, "Input format: jsonl or csv (default: from extension)");
    pp->callback([&] { action = [&](Context& c) { cmd_preprocess(c, pp_in, pp_out, pp_format); }; });

    // filter-ads
    std::optional<std::string> fa_in, fa_out;
    auto* fa = app.add_subcommand("filter-ads", "Keep reviews that mention ads");
    fa->alias("filter_ads");
    add_common(fa, common);
    fa->add_option("--in", fa_in, "Corpus (preprocessed or raw)");
    fa->add_option("--out", fa_out, "Filtered corpus (JSONL)");
    fa->callback([&] { action = [&](Context& c) { cmd_filter_ads(c, fa_in, fa_out); }; });

    // phrases
    std::optional<std::string> ph_in, ph_out;
    std::optional<double> ph_pmi2, ph_pmi3;
    std::optional<std::uint64_t> ph_min;
    std::optional<int> ph_passes;
    auto* ph = app.add_subcommand("phrases", "Mine 2- and 3-word phrases by PMI");
    add_common(ph, common);
    ph->add_option("--in", ph_in, "Corpus (preprocessed or raw)");
    ph->add_option("--out", ph_out, "Phrase table (TSV)");
    ph->add_option("--pmi-2gram", ph_pmi2, "PMI threshold for 2-grams");
    ph->add_option("--pmi-3gram", ph_pmi3, "PMI threshold for 3-grams");
    ph->add_option("--min-count", ph_min, "Minimum phrase count");
    ph->add_option("--passes", ph_passes, "1 for 2-grams only, 2 to add 3-grams");
    ph->callback([&] {
        action = [&](Context& c) {
            if (ph_pmi2) c.cfg.phrases.pmi_threshold_2gram = *ph_pmi2;
            if (ph_pmi3) c.cfg.phrases.pmi_threshold_3gram = *ph_pmi3;
            if (ph_min) c.cfg.phrases.min_count = *ph_min;
            if (ph_passes) c.cfg.phrases.passes = *ph_passes;
            c.cfg.phrases.validate();
            cmd_phrases(c, ph_in, ph_out);
        };
    });

    // train
    std::optional<std::string> tr_in, tr_phrases, tr_out;
    std::optional<int> tr_dim, tr_window, tr_negative, tr_epochs;
    std::optional<double> tr_lr, tr_subsample;
    std::optional<std::uint64_t> tr_min;
    std::optional<unsigned> tr_workers;
    auto* tr = app.add_subcommand("train", "Train skip-gram word vectors");
    add_common(tr, common);
    tr->add_option("--in", tr_in, "Corpus (preprocessed or raw)");
    tr->add_option("--phrases", tr_phrases, "Phrase table to merge into single tokens");
    tr->add_option("--out", tr_out, "Model (word2vec text format)");
    tr->add_option("--dim", tr_dim, "Vector dimension");
    tr->add_option("--window", tr_window, "Maximum context window");
    tr->add_option("--negative", tr_negative, "Negative samples per pair");
    tr->add_option("--epochs", tr_epochs, "Training epochs");
    tr->add_option("--lr", tr_lr, "Initial learning rate");
    tr->add_option("--min-count", tr_min, "Minimum token count");
    tr->add_option("--subsample", tr_subsample, "Frequent-word subsampling threshold (0 disables)");
    tr->add_option("--workers", tr_workers, "Training threads; more than one is not reproducible");
    tr->callback([&] {
        action = [&](Context& c) {
            auto& t = c.cfg.train;
            if (tr_dim) t.dim = *tr_dim;
            if (tr_window) t.window = *tr_window;
            if (tr_negative) t.negative = *tr_negative;
            if (tr_epochs) t.epochs = *tr_epochs;
            if (tr_lr) t.initial_lr = *tr_lr;
            if (tr_min) t.min_count = *tr_min;
            if (tr_subsample) t.subsample_threshold = *tr_subsample;
            if (tr_workers) t.workers = *tr_workers;
            cmd_train(c, tr_in, tr_phrases, tr_out);
        };
    });

    // keywords
    std::string kw_seeds;
    std::optional<std::string> kw_model, kw_phrases, kw_deny, kw_out, kw_spec;
    std::optional<std::size_t> kw_k;
    std::string kw_name = "ads";
    bool kw_raw = false;
    auto* kw = app.add_subcommand("keywords", "Retrieve terms closest to seed terms");
    add_common(kw, common);
    kw->add_option("--seeds", kw_seeds, "Comma-separated seed terms, e.g. ad,ads")->required();
    kw->add_option("--k", kw_k, "Number of terms (default 50)");
    kw->add_option("--model", kw_model, "Trained model");
    kw->add_option("--phrases", kw_phrases, "Phrase table; phrases join the candidates");
    kw->add_option("--denylist", kw_deny, "Terms to exclude, one per line");
    kw->add_option("--out", kw_out, "Keyword list (TSV)");
    kw->add_option("--spec-out", kw_spec, "Also write an issue spec built from the keywords");
    kw->add_option("--issue-name", kw_name, "Issue name used with --spec-out");
    kw->add_flag("--raw-seeds", kw_raw, "Use seeds verbatim instead of lemmatizing them");
    kw->callback([&] {
        action = [&](Context& c) {
            if (kw_k) {
                if (*kw_k == 0) throw ValidationError("--k must be positive");
                c.cfg.k = *kw_k;
            }
            cmd_keywords(c, kw_seeds, kw_model, kw_phrases, kw_deny, kw_out, kw_spec, kw_name, kw_raw);
        };
    });

    // grade / rank share their inputs
    GradeInputs gr_in, rk_in;
    auto add_grade_options = [&](CLI::App* sub, GradeInputs& g) {
        add_common(sub, common);
        sub->add_option("--corpus", g.corpus, "Corpus (preprocessed or raw)");
        sub->add_option("--issues", g.issues, "Issue specs (JSON)");
        sub->add_flag("--performance-issues", g.performance_issues, "Use the built-in performance issue specs");
        sub->add_option("--f", g.f, "Confinement: soft_division or sigmoid");
        sub->add_option("--epsilon", g.epsilon, "Clamp for soft division");
        sub->add_option("--scope", g.scope, "Sentiment scope: matching_sentences or all_review_sentences");
        sub->add_flag("--ads-only", g.ads_only, "Grade only reviews that mention ads");
    };
    auto* gr = app.add_subcommand("grade", "Score user concern per issue");
    add_grade_options(gr, gr_in);
    gr->add_option("--out", gr_in.out, "Issue scores (JSON)");
    gr->callback([&] { action = [&](Context& c) { cmd_grade(c, gr_in); }; });

    auto* rk = app.add_subcommand("rank", "Score and rank issues by concern");
    add_grade_options(rk, rk_in);
    rk->add_option("--out", rk_in.out, "Ranking (TSV); a JSON twin is written alongside");
    rk->callback([&] { action = [&](Context& c) { cmd_rank(c, rk_in); }; });

    // eval-ndcg
    std::optional<std::string> nd_pred, nd_out;
    std::string nd_truth, nd_gain = "linear";
    std::optional<std::size_t> nd_k;
    auto* nd = app.add_subcommand("eval-ndcg", "NDCG@k of a ranking against ground truth");
    nd->alias("eval_ndcg");
    add_common(nd, common);
    nd->add_option("--predicted", nd_pred, "Ranking TSV or scores JSON");
    nd->add_option("--truth", nd_truth, "Ground truth, 'label<TAB>score' per line")->required();
    nd->add_option("--k", nd_k, "Cutoff (default: ranking length)");
    nd->add_option("--gain", nd_gain, "linear or exponential");
    nd->add_option("--out", nd_out, "Result (JSON)");
    nd->callback([&] { action = [&](Context& c) { cmd_eval_ndcg(c, nd_pred, nd_truth, nd_k, nd_gain, nd_out); }; });

    // correlate
    std::string co_in;
    std::optional<std::string> co_out;
    auto* co = app.add_subcommand("correlate", "Pearson and Spearman correlation with p-values");
    add_common(co, common);
    co->add_option("--in", co_in, "CSV with columns label,x,y and optional group")->required();
    co->add_option("--out", co_out, "Result (JSON)");
    co->callback([&] { action = [&](Context& c) { cmd_correlate(c, co_in, co_out); }; });

    // tests
    std::string te_in;
    std::optional<std::string> te_out;
    auto* te = app.add_subcommand("tests", "Significance tests on with/without-ads measurements");
    add_common(te, common);
    te->add_option("--measurements", te_in, "CSV with app_id,cost_type,with_ads,no_ads")->required();
    te->add_option("--out", te_out, "Result (JSON)");
    te->callback([&] { action = [&](Context& c) { cmd_tests(c, te_in, te_out); }; });

    // viz
    VizInputs vz;
    auto* v = app.add_subcommand("viz", "Bubble chart of keywords sized by concern");
    add_common(v, common);
    v->add_option("--model", vz.model, "Trained model");
    v->add_option("--keywords", vz.keywords, "Keyword list from `keywords`");
    v->add_option("--concerns", vz.concerns, "'term<TAB>concern' lines; default grades each keyword");
    v->add_option("--corpus", vz.corpus, "Corpus used to grade keywords");
    v->add_option("--labels", vz.labels, "'term<TAB>group' lines for coloring");
    v->add_option("--out", vz.out, "SVG output");
    v->add_option("--json", vz.json_out, "JSON output (default: next to the SVG)");
    v->add_option("--width", vz.style.width, "Canvas width");
    v->add_option("--height", vz.style.height, "Canvas height");
    v->add_option("--r-min", vz.style.r_min, "Smallest radius");
    v->add_option("--r-max", vz.style.r_max, "Largest radius");
    bool keep_overlaps = false;
    v->add_flag("--keep-overlaps", keep_overlaps, "Skip the overlap-removal pass");
    v->callback([&] {
        action = [&](Context& c) {
            vz.style.resolve_overlaps = !keep_overlaps;
            vz.style.validate();
            cmd_viz(c, vz);
        };
    });

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        Context ctx{resolve_config(common), out};
        if (action) action(ctx);
        return 0;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int run_cli(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args, std::cout, std::cerr);
}

} // namespace rankminer::cli
