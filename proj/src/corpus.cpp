#include "rankminer/corpus.hpp"

#include "rankminer/error.hpp"
#include "rankminer/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>

namespace rankminer {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::string_view kCleanFormat = "rankminer.clean-corpus";
constexpr int kCleanVersion = 1;

std::optional<int> parse_rating(std::string_view s) {
    s = trim(s);
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
    return v;
}

// Returns an error message, or empty when the record is valid.
std::string validate(const RawReview& r) {
    if (r.id.empty()) return "missing id";
    if (r.app_id.empty()) return "missing app_id";
    if (r.rating < 1 || r.rating > 5) return "rating " + std::to_string(r.rating) + " outside 1..5";
    if (trim(r.text).empty()) return "empty text";
    return {};
}

std::string json_scalar_to_string(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
    throw ValidationError("expected string or integer");
}

RawReview review_from_json(const json& obj) {
    if (!obj.is_object()) throw ValidationError("record is not a JSON object");
    for (const char* key : {"id", "app_id", "rating", "text"}) {
        if (!obj.contains(key)) throw ValidationError(std::string("missing key '") + key + "'");
    }
    RawReview r;
    r.id = json_scalar_to_string(obj.at("id"));
    r.app_id = json_scalar_to_string(obj.at("app_id"));
    const auto& rating = obj.at("rating");
    if (rating.is_number_integer()) {
        r.rating = rating.get<int>();
    } else if (rating.is_number_float()) {
        double d = rating.get<double>();
        if (d != static_cast<int>(d)) throw ValidationError("non-integer rating");
        r.rating = static_cast<int>(d);
    } else if (rating.is_string()) {
        auto v = parse_rating(rating.get<std::string>());
        if (!v) throw ValidationError("unparsable rating");
        r.rating = *v;
    } else {
        throw ValidationError("unparsable rating");
    }
    if (!obj.at("text").is_string()) throw ValidationError("text is not a string");
    r.text = obj.at("text").get<std::string>();
    if (obj.contains("date") && !obj.at("date").is_null()) {
        if (!obj.at("date").is_string()) throw ValidationError("date is not a string");
        r.date = obj.at("date").get<std::string>();
    }
    return r;
}

void parse_jsonl(std::string_view contents, IngestResult& out, std::vector<RawReview>& reviews) {
    std::size_t record = 0;
    for (auto& line : split(contents, '\n')) {
        if (trim(line).empty()) continue;
        ++record;
        try {
            auto obj = json::parse(line);
            auto r = review_from_json(obj);
            if (auto err = validate(r); !err.empty()) {
                out.rejected.push_back({record, err});
                continue;
            }
            reviews.push_back(std::move(r));
        } catch (const json::exception& e) {
            out.rejected.push_back({record, std::string("invalid JSON: ") + e.what()});
        } catch (const ValidationError& e) {
            out.rejected.push_back({record, e.what()});
        }
    }
}

void parse_csv_records(std::string_view contents, IngestResult& out, std::vector<RawReview>& reviews) {
    auto rows = parse_csv(contents);
    if (rows.empty()) return;
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < rows[0].size(); ++i) col[std::string(trim(rows[0][i]))] = i;
    for (const char* key : {"id", "app_id", "rating", "text"}) {
        if (!col.count(key)) throw ValidationError(std::string("CSV header lacks column '") + key + "'");
    }
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.size() == 1 && trim(row[0]).empty()) continue;
        auto field = [&](const std::string& name) -> std::optional<std::string> {
            auto it = col.find(name);
            if (it == col.end() || it->second >= row.size()) return std::nullopt;
            return row[it->second];
        };
        RawReview r;
        auto id = field("id"), app = field("app_id"), rating = field("rating"), text = field("text");
        if (!id || !app || !rating || !text) {
            out.rejected.push_back({i, "row has too few columns"});
            continue;
        }
        r.id = *id;
        r.app_id = *app;
        auto rv = parse_rating(*rating);
        if (!rv) {
            out.rejected.push_back({i, "unparsable rating"});
            continue;
        }
        r.rating = *rv;
        r.text = *text;
        if (auto d = field("date"); d && !d->empty()) r.date = *d;
        if (auto err = validate(r); !err.empty()) {
            out.rejected.push_back({i, err});
            continue;
        }
        reviews.push_back(std::move(r));
    }
}

bool is_token_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '\'';
}

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

} // namespace

std::vector<std::vector<std::string>> parse_csv(std::string_view s) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool any = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        any = true;
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < s.size() && s[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < s.size() && s[i + 1] == '\n') ++i;
            row.push_back(std::move(field));
            field.clear();
            rows.push_back(std::move(row));
            row.clear();
            any = false;
        } else {
            field += c;
        }
    }
    if (in_quotes) throw ValidationError("unterminated quoted CSV field");
    if (any) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

IngestResult parse_reviews(std::string_view contents, InputFormat format, const std::string& source_path) {
    IngestResult out;
    std::vector<RawReview> reviews;
    if (format == InputFormat::jsonl)
        parse_jsonl(contents, out, reviews);
    else
        parse_csv_records(contents, out, reviews);
    if (reviews.empty()) {
        throw EmptyCorpusError("no parsable reviews in '" + source_path + "' (" +
                               std::to_string(out.rejected.size()) + " rejected)");
    }
    out.corpus = RawCorpus(std::move(reviews), source_path);
    return out;
}

IngestResult ingest(const std::string& path, InputFormat format) {
    return parse_reviews(read_file(path), format, path);
}

InputFormat format_from_path(const std::string& path) {
    auto dot = path.rfind('.');
    if (dot != std::string::npos) {
        auto ext = path.substr(dot + 1);
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (ext == "csv") return InputFormat::csv;
    }
    return InputFormat::jsonl;
}

std::string export_jsonl(const RawCorpus& corpus) {
    std::string out;
    for (const auto& r : corpus.reviews()) {
        ordered_json obj;
        obj["id"] = r.id;
        obj["app_id"] = r.app_id;
        obj["rating"] = r.rating;
        obj["text"] = r.text;
        if (r.date) obj["date"] = *r.date;
        out += obj.dump();
        out += '\n';
    }
    return out;
}

std::string clean_text(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        auto c = static_cast<unsigned char>(text[i]);
        // U+2019 RIGHT SINGLE QUOTATION MARK is the usual apostrophe on phones.
        if (c == 0xE2 && i + 2 < text.size() && static_cast<unsigned char>(text[i + 1]) == 0x80 &&
            static_cast<unsigned char>(text[i + 2]) == 0x99) {
            out += '\'';
            i += 2;
            continue;
        }
        if (c >= 0x80) {
            out += ' ';
            continue;
        }
        char lc = static_cast<char>(std::tolower(c));
        if (is_token_char(lc) || is_terminator(lc) || lc == ',' || lc == ';')
            out += lc;
        else
            out += ' ';
    }
    return out;
}

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || is_terminator(text[i])) {
            auto seg = trim(text.substr(start, i - start));
            if (!seg.empty()) out.emplace_back(seg);
            start = i + 1;
        }
    }
    return out;
}

std::vector<std::string> tokenize(std::string_view sentence) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < sentence.size()) {
        while (i < sentence.size() && !is_token_char(sentence[i])) ++i;
        std::size_t j = i;
        while (j < sentence.size() && is_token_char(sentence[j])) ++j;
        auto tok = sentence.substr(i, j - i);
        while (!tok.empty() && tok.front() == '\'') tok.remove_prefix(1);
        while (!tok.empty() && tok.back() == '\'') tok.remove_suffix(1);
        if (!tok.empty()) out.emplace_back(tok);
        i = j;
    }
    return out;
}

std::optional<CleanReview> preprocess(const RawReview& review, const Lemmatizer& lemmatizer) {
    CleanReview out;
    out.id = review.id;
    out.app_id = review.app_id;
    out.rating = review.rating;
    for (const auto& sentence : split_sentences(clean_text(review.text))) {
        Sentence tokens;
        for (auto& tok : tokenize(sentence)) tokens.push_back(lemmatizer.lemmatize(tok));
        if (tokens.empty()) continue;
        out.token_count += tokens.size();
        out.sentences.push_back(std::move(tokens));
    }
    if (out.token_count <= 3) return std::nullopt;
    return out;
}

PreprocessResult preprocess_corpus(const RawCorpus& raw, const Lemmatizer& lemmatizer) {
    std::vector<CleanReview> kept;
    for (const auto& r : raw.reviews()) {
        if (auto c = preprocess(r, lemmatizer)) kept.push_back(std::move(*c));
    }
    return {Corpus(std::move(kept), raw.source_path()), raw.review_count()};
}

bool is_ad_token(std::string_view token) {
    return token == "ad" || token == "ads" || token.substr(0, 6) == "advert";
}

bool mentions_ads(const CleanReview& review) {
    for (const auto& s : review.sentences) {
        if (std::any_of(s.begin(), s.end(), [](const std::string& t) { return is_ad_token(t); })) return true;
    }
    return false;
}

Corpus filter_ad_reviews(const Corpus& corpus) {
    std::vector<CleanReview> kept;
    std::copy_if(corpus.reviews().begin(), corpus.reviews().end(), std::back_inserter(kept), mentions_ads);
    return Corpus(std::move(kept), corpus.source_path());
}

std::string write_clean_jsonl(const Corpus& corpus) {
    ordered_json header;
    header["format"] = kCleanFormat;
    header["version"] = kCleanVersion;
    header["reviews"] = corpus.review_count();
    std::string out = header.dump() + "\n";
    for (const auto& r : corpus.reviews()) {
        ordered_json obj;
        obj["id"] = r.id;
        obj["app_id"] = r.app_id;
        obj["rating"] = r.rating;
        obj["sentences"] = r.sentences;
        out += obj.dump();
        out += '\n';
    }
    return out;
}

Corpus read_clean_jsonl(std::string_view contents, const std::string& source_path) {
    std::vector<CleanReview> reviews;
    bool header_seen = false;
    std::size_t line_no = 0;
    for (auto& line : split(contents, '\n')) {
        ++line_no;
        if (trim(line).empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::exception& e) {
            throw ValidationError(source_path + ":" + std::to_string(line_no) + ": invalid JSON: " + e.what());
        }
        if (!header_seen) {
            if (!obj.is_object() || obj.value("format", "") != kCleanFormat)
                throw ValidationError("'" + source_path + "' is not a preprocessed corpus (missing header)");
            if (obj.value("version", 0) != kCleanVersion)
                throw ValidationError("'" + source_path + "': unsupported corpus version");
            header_seen = true;
            continue;
        }
        try {
            CleanReview r;
            r.id = obj.at("id").get<std::string>();
            r.app_id = obj.at("app_id").get<std::string>();
            r.rating = obj.at("rating").get<int>();
            r.sentences = obj.at("sentences").get<std::vector<Sentence>>();
            for (const auto& s : r.sentences) r.token_count += s.size();
            reviews.push_back(std::move(r));
        } catch (const json::exception& e) {
            throw ValidationError(source_path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!header_seen) throw ValidationError("'" + source_path + "' is empty");
    if (reviews.empty()) throw EmptyCorpusError("'" + source_path + "' holds no reviews");
    return Corpus(std::move(reviews), source_path);
}

Corpus load_clean_corpus(const std::string& path) { return read_clean_jsonl(read_file(path), path); }

} // namespace rankminer
