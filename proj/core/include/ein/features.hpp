#pragma once

#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ein/corpus.hpp"
#include "ein/embedding.hpp"
#include "ein/lexicon.hpp"

namespace ein {

/// Concatenated per-(lexicon, emotion) normalized frequencies, with a named
/// coordinate layout "Lexicon:emotion" in lexicon order then schema order.
struct EmotionVector {
    Eigen::VectorXd values;
    std::vector<std::string> layout;
};

struct WordList {
    std::string name;
    std::set<std::string> words;
};

// Coordinate names for a lexicon list, "Lexicon:emotion" in concatenation order.
std::vector<std::string> feature_layout(const std::vector<Lexicon>& lexicons);

// Per-coordinate value = (#tokens carrying that emotion in that lexicon) /
// (token count). Empty documents yield the zero vector.
EmotionVector emotion_features(const Document& doc, const std::vector<Lexicon>& lexicons);

// Emotion feature matrix for a whole corpus, one row per document.
Eigen::MatrixXd emotion_feature_matrix(const Corpus& corpus, const std::vector<Lexicon>& lexicons);

struct BowFeatures {
    std::vector<std::string> vocabulary;
    // Sparse counts: per document, (vocab index, count) pairs sorted by index.
    std::vector<std::vector<std::pair<int, int>>> counts;
};

BowFeatures bow_features(const Corpus& corpus, std::size_t min_df, std::size_t max_vocab);

// Dense row-per-document matrix view of BOW counts.
Eigen::MatrixXd bow_dense(const BowFeatures& bow, std::size_t n_docs);

Eigen::VectorXd avg_embedding(const Document& doc, const EmbeddingTable& table, bool skip_oov);

double lexical_mean_value(const Document& doc, const WordList& list);
double corpus_mean_value(const Corpus& corpus, const WordList& list);

WordList load_word_list(const std::string& path, const std::string& name);

}  // namespace ein
