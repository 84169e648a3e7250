#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace ein {

struct Document {
    std::string id;
    std::string text;
    std::vector<std::string> tokens;
    std::string label;
    std::string source;  // news_articles | twitter | other
};

struct Corpus {
    std::vector<Document> documents;
    std::set<std::string> labels;
    std::string provenance;

    std::size_t size() const { return documents.size(); }
};

struct SplitSpec {
    double test_fraction = 0.2;
    double validation_fraction = 0.2;  // fraction of the remaining train part
    std::uint64_t seed = 0;
    bool stratified = true;
};

struct PreprocessReport {
    std::size_t truncated = 0;
    std::size_t too_short = 0;
    std::size_t duplicates = 0;
    std::string to_json() const;
};

struct ClassStats {
    std::size_t count = 0;
    double percentage = 0.0;
};

struct CorpusStats {
    std::map<std::string, ClassStats> per_class;
    std::size_t total = 0;
    std::string to_json() const;
};

// Lowercased maximal alphanumeric runs; apostrophes kept word-internal;
// URLs and punctuation dropped.
std::vector<std::string> tokenize(const std::string& text);

enum class CorpusFormat { jsonl, csv };

// JSONL: one object per line with string fields id, text, label, source.
// CSV: header id,text,label,source with RFC-4180 quoting.
Corpus load_corpus(const std::string& path, CorpusFormat format);

// Truncate to max_tokens, drop documents shorter than min_tokens, drop exact
// token-sequence duplicates (first occurrence wins). Input order preserved.
Corpus preprocess(const Corpus& corpus, std::size_t max_tokens, std::size_t min_tokens,
                  bool dedup, PreprocessReport* report = nullptr);

struct SplitResult {
    Corpus train;
    Corpus validation;
    Corpus test;
};

SplitResult split(const Corpus& corpus, const SplitSpec& spec);

struct Fold {
    Corpus train;
    Corpus test;
};

std::vector<Fold> kfold(const Corpus& corpus, std::size_t k, std::uint64_t seed, bool stratified);

CorpusStats corpus_stats(const Corpus& corpus);

}  // namespace ein
