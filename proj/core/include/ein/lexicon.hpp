#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace ein {

// The closed registry of canonical emotion labels. Order here is the canonical
// order used everywhere an aggregated 17-emotion view is produced.
inline const std::vector<std::string>& canonical_emotions() {
    static const std::vector<std::string> kLabels = {
        "joy",      "sadness", "anger",    "fear",    "disgust", "surprise",
        "anticipation", "trust", "love",   "hope",    "calmness", "despair",
        "hate",     "like",    "pos_emo",  "neg_emo", "ambiguous"};
    return kLabels;
}

bool is_canonical_emotion(const std::string& name);

/// One of the five supported lexicon layouts: a name plus an ordered list of
/// emotions drawn from the canonical registry.
struct LexiconSchema {
    std::string name;
    std::vector<std::string> emotions;

    std::size_t dimension() const { return emotions.size(); }
    bool has_emotion(const std::string& e) const;
};

// The five builtin schemas, in stable order:
// EmoSenticNet(6), EmoLex(8), SentiSense(14), LIWC(4), Empath(6).
const std::vector<LexiconSchema>& builtin_schemas();

// Lookup by name; returns nullopt for unknown names.
std::optional<LexiconSchema> schema_by_name(const std::string& name);

/// A word -> emotion-set table validated against a schema. Immutable after
/// load; concurrent reads are safe.
class Lexicon {
public:
    explicit Lexicon(LexiconSchema schema) : schema_(std::move(schema)) {}

    const LexiconSchema& schema() const { return schema_; }
    std::size_t dimension() const { return schema_.dimension(); }
    std::size_t size() const { return entries_.size(); }

    // Case-insensitive; unknown words yield the empty set.
    const std::set<std::string>& lookup(const std::string& token) const;

    // Emotion indices within schema order, as a bitmask over schema.emotions.
    // Faster path used by the featurizer.
    std::uint32_t lookup_mask(const std::string& token) const;

    // Validates the emotion against the schema; idempotent for duplicates.
    void add(const std::string& word, const std::string& emotion);

    bool operator==(const Lexicon& other) const;

private:
    LexiconSchema schema_;
    std::unordered_map<std::string, std::set<std::string>> entries_;
    std::unordered_map<std::string, std::uint32_t> masks_;
};

// Loads the tab-separated lexicon format:
//   #schema: <name>        (required, must match `schema`)
//   # free comments
//   word<TAB>emotion
// Multi-word entries are rejected (matching is unigram-only).
Lexicon load_lexicon(const std::string& path, const LexiconSchema& schema);

// Sum of schema dimensions; the length of the concatenated emotion vector.
std::size_t feature_dimension(const std::vector<Lexicon>& lexicons);

std::string to_lower(std::string s);

}  // namespace ein
