#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ein/corpus.hpp"
#include "ein/lexicon.hpp"
#include "ein/neural.hpp"

namespace ein {

/// Flat key-value experiment configuration. File grammar: one `key = value`
/// per line, `#` comments, blank lines ignored.
class ExperimentConfig {
public:
    static ExperimentConfig from_file(const std::string& path);
    static ExperimentConfig from_string(const std::string& text);

    bool has(const std::string& key) const;
    std::string get(const std::string& key) const;  // throws ConfigError when absent
    std::string get_or(const std::string& key, const std::string& fallback) const;
    long get_int(const std::string& key, long fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    void set(const std::string& key, const std::string& value);

    const std::map<std::string, std::string>& entries() const { return entries_; }

    // Checks path-valued keys and mandatory fields; throws ConfigError.
    void validate() const;

    std::uint64_t seed() const;
    std::string out_dir() const;

    // FNV-1a over the canonical "key=value\n" rendering.
    std::string hash() const;

private:
    std::map<std::string, std::string> entries_;
};

// Lexicons named by `lexicon.<SchemaName>` keys, in builtin schema order.
std::vector<Lexicon> load_config_lexicons(const ExperimentConfig& config);

Corpus load_config_corpus(const ExperimentConfig& config, const std::string& key = "corpus");

// The table from the `embeddings` key, or a seeded random table built over the
// corpus vocabulary when no file is configured.
EmbeddingTable resolve_embeddings(const ExperimentConfig& config, const Corpus& corpus);

EinConfig ein_config_from(const ExperimentConfig& config, bool binary);

// prepare -> featurize -> train -> evaluate; writes metrics.json, history and
// model artifacts, and manifest.json into the output directory.
void run_experiment(const ExperimentConfig& config);

// IG ranking, per-emotion Welch t-tests (real vs false), top-N emotions from
// linear-SVM coefficients, and word-list mean values.
void run_analysis(const ExperimentConfig& config);

// Penultimate-embedding export plus 2-d PCA projection (id,label,x,y CSV).
void run_projection(const ExperimentConfig& config, const std::string& checkpoint_path);

std::string fnv1a_hex(const std::string& data);
std::string file_hash(const std::string& path);

}  // namespace ein
