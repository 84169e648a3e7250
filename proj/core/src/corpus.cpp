#include "ein/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "ein/errors.hpp"
#include "ein/lexicon.hpp"

namespace ein {

namespace {

bool looks_like_url(const std::string& chunk) {
    return chunk.find("://") != std::string::npos || chunk.rfind("www.", 0) == 0;
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::istringstream iss(text);
    std::string chunk;
    while (iss >> chunk) {
        if (looks_like_url(chunk)) continue;
        std::string cur;
        for (std::size_t i = 0; i < chunk.size(); ++i) {
            unsigned char c = static_cast<unsigned char>(chunk[i]);
            if (std::isalnum(c)) {
                cur += static_cast<char>(std::tolower(c));
            } else if (c == '\'' && !cur.empty() && i + 1 < chunk.size() &&
                       std::isalnum(static_cast<unsigned char>(chunk[i + 1]))) {
                cur += '\'';
            } else if (!cur.empty()) {
                tokens.push_back(cur);
                cur.clear();
            }
        }
        if (!cur.empty()) tokens.push_back(cur);
    }
    return tokens;
}

namespace {

Corpus from_records(std::vector<Document> docs, const std::string& path) {
    Corpus corpus;
    corpus.provenance = path;
    for (auto& d : docs) {
        d.tokens = tokenize(d.text);
        corpus.labels.insert(d.label);
        corpus.documents.push_back(std::move(d));
    }
    return corpus;
}

Corpus load_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open corpus file: " + path);
    std::vector<Document> docs;
    std::string line;
    std::size_t record = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++record;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path + ": record " + std::to_string(record) + ": " + e.what());
        }
        for (const char* field : {"id", "text", "label", "source"})
            if (!j.contains(field) || !j[field].is_string())
                throw ParseError(path + ": record " + std::to_string(record) +
                                 ": missing string field '" + field + "'");
        docs.push_back({j["id"], j["text"], {}, j["label"], j["source"]});
    }
    return from_records(std::move(docs), path);
}

// RFC-4180: quoted fields may contain commas, doubled quotes, and newlines.
std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool any = false;
    char c;
    while (in.get(c)) {
        any = true;
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    field += '"';
                    in.get();
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && in.peek() == '\n') in.get();
            row.push_back(std::move(field));
            field.clear();
            rows.push_back(std::move(row));
            row.clear();
        } else {
            field += c;
        }
    }
    if (any && (!field.empty() || !row.empty())) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

Corpus load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open corpus file: " + path);
    auto rows = parse_csv(in);
    if (rows.empty()) return from_records({}, path);
    const std::vector<std::string> expected = {"id", "text", "label", "source"};
    if (rows[0] != expected)
        throw ParseError(path + ": expected header 'id,text,label,source'");
    std::vector<Document> docs;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != 4)
            throw ParseError(path + ": record " + std::to_string(r) + ": expected 4 fields, got " +
                             std::to_string(rows[r].size()));
        docs.push_back({rows[r][0], rows[r][1], {}, rows[r][2], rows[r][3]});
    }
    return from_records(std::move(docs), path);
}

}  // namespace

Corpus load_corpus(const std::string& path, CorpusFormat format) {
    switch (format) {
        case CorpusFormat::jsonl: return load_jsonl(path);
        case CorpusFormat::csv: return load_csv(path);
    }
    throw ConfigError("unknown corpus format");
}

Corpus preprocess(const Corpus& corpus, std::size_t max_tokens, std::size_t min_tokens, bool dedup,
                  PreprocessReport* report) {
    if (min_tokens < 1 || max_tokens < min_tokens)
        throw ConfigError("preprocess requires max_tokens >= min_tokens >= 1");
    PreprocessReport rep;
    Corpus out;
    out.provenance = corpus.provenance;
    std::unordered_set<std::string> seen;
    for (const Document& d : corpus.documents) {
        Document doc = d;
        if (doc.tokens.size() > max_tokens) {
            doc.tokens.resize(max_tokens);
            ++rep.truncated;
        }
        if (doc.tokens.size() < min_tokens) {
            ++rep.too_short;
            continue;
        }
        if (dedup) {
            std::string key;
            for (const auto& t : doc.tokens) {
                key += t;
                key += '\x1f';
            }
            if (!seen.insert(std::move(key)).second) {
                ++rep.duplicates;
                continue;
            }
        }
        out.labels.insert(doc.label);
        out.documents.push_back(std::move(doc));
    }
    if (report) *report = rep;
    return out;
}

namespace {

std::map<std::string, std::vector<std::size_t>> indices_by_class(const Corpus& corpus) {
    std::map<std::string, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < corpus.documents.size(); ++i)
        by_class[corpus.documents[i].label].push_back(i);
    return by_class;
}

Corpus subset(const Corpus& corpus, std::vector<std::size_t> idx) {
    std::sort(idx.begin(), idx.end());
    Corpus out;
    out.provenance = corpus.provenance;
    for (std::size_t i : idx) {
        out.documents.push_back(corpus.documents[i]);
        out.labels.insert(corpus.documents[i].label);
    }
    return out;
}

}  // namespace

SplitResult split(const Corpus& corpus, const SplitSpec& spec) {
    if (spec.test_fraction <= 0 || spec.test_fraction >= 1 || spec.validation_fraction < 0 ||
        spec.validation_fraction >= 1)
        throw ConfigError("split fractions must lie in (0,1)");
    std::mt19937_64 rng(spec.seed);
    std::vector<std::size_t> test_idx, val_idx, train_idx;

    auto deal = [&](std::vector<std::size_t>& pool) {
        std::shuffle(pool.begin(), pool.end(), rng);
        auto n = pool.size();
        auto n_test = static_cast<std::size_t>(std::llround(double(n) * spec.test_fraction));
        auto n_val =
            static_cast<std::size_t>(std::llround(double(n - n_test) * spec.validation_fraction));
        for (std::size_t i = 0; i < n; ++i) {
            if (i < n_test)
                test_idx.push_back(pool[i]);
            else if (i < n_test + n_val)
                val_idx.push_back(pool[i]);
            else
                train_idx.push_back(pool[i]);
        }
    };

    if (spec.stratified) {
        for (auto& [label, idx] : indices_by_class(corpus)) {
            if (idx.size() < 3)
                throw ValidationError("stratified split needs >= 3 documents per class; class '" +
                                      label + "' has " + std::to_string(idx.size()));
            deal(idx);
        }
    } else {
        std::vector<std::size_t> all(corpus.size());
        std::iota(all.begin(), all.end(), 0);
        deal(all);
    }
    return {subset(corpus, train_idx), subset(corpus, val_idx), subset(corpus, test_idx)};
}

std::vector<Fold> kfold(const Corpus& corpus, std::size_t k, std::uint64_t seed, bool stratified) {
    if (k < 2) throw ConfigError("kfold requires k >= 2");
    if (k > corpus.size())
        throw ValidationError("kfold: k=" + std::to_string(k) + " exceeds corpus size " +
                              std::to_string(corpus.size()));
    std::mt19937_64 rng(seed);
    std::vector<std::vector<std::size_t>> fold_test(k);
    std::size_t cursor = 0;

    auto deal = [&](std::vector<std::size_t>& pool) {
        std::shuffle(pool.begin(), pool.end(), rng);
        for (std::size_t i : pool) {
            fold_test[cursor % k].push_back(i);
            ++cursor;
        }
    };

    if (stratified) {
        for (auto& [label, idx] : indices_by_class(corpus)) {
            if (idx.size() < k)
                throw ValidationError("stratified kfold needs >= k documents per class; class '" +
                                      label + "' has " + std::to_string(idx.size()));
            deal(idx);
        }
    } else {
        std::vector<std::size_t> all(corpus.size());
        std::iota(all.begin(), all.end(), 0);
        deal(all);
    }

    std::vector<Fold> folds;
    for (std::size_t f = 0; f < k; ++f) {
        std::vector<std::size_t> train_idx;
        for (std::size_t g = 0; g < k; ++g)
            if (g != f) train_idx.insert(train_idx.end(), fold_test[g].begin(), fold_test[g].end());
        folds.push_back({subset(corpus, train_idx), subset(corpus, fold_test[f])});
    }
    return folds;
}

CorpusStats corpus_stats(const Corpus& corpus) {
    CorpusStats stats;
    stats.total = corpus.size();
    for (const auto& d : corpus.documents) stats.per_class[d.label].count++;
    for (auto& [label, cs] : stats.per_class)
        cs.percentage = stats.total ? 100.0 * double(cs.count) / double(stats.total) : 0.0;
    return stats;
}

std::string PreprocessReport::to_json() const {
    nlohmann::json j{{"truncated", truncated}, {"too_short", too_short}, {"duplicates", duplicates}};
    return j.dump(2);
}

std::string CorpusStats::to_json() const {
    nlohmann::json j;
    j["total"] = total;
    j["classes"] = nlohmann::json::object();
    for (const auto& [label, cs] : per_class)
        j["classes"][label] = {{"count", cs.count}, {"percentage", cs.percentage}};
    return j.dump(2);
}

}  // namespace ein
