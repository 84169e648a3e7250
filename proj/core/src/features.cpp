#include "ein/features.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "ein/errors.hpp"

namespace ein {

void EmbeddingTable::add(const std::string& word, const Eigen::VectorXd& vec) {
    if (dimension_ == 0) dimension_ = static_cast<std::size_t>(vec.size());
    if (static_cast<std::size_t>(vec.size()) != dimension_)
        throw ValidationError("embedding dimension mismatch for word '" + word + "'");
    auto [it, inserted] = index_.try_emplace(word, static_cast<int>(words_.size()));
    if (!inserted) {
        vectors_[it->second] = vec;
        return;
    }
    words_.push_back(word);
    vectors_.push_back(vec);
}

int EmbeddingTable::index_of(const std::string& word) const {
    auto it = index_.find(word);
    return it == index_.end() ? -1 : it->second;
}

EmbeddingTable load_embeddings(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open embedding file: " + path);
    std::size_t vocab = 0, dim = 0;
    std::string header;
    if (!std::getline(in, header)) throw ParseError(path + ": empty embedding file");
    {
        std::istringstream hs(header);
        if (!(hs >> vocab >> dim) || dim == 0)
            throw ParseError(path + ": expected header '<vocab_size> <dimension>'");
    }
    EmbeddingTable table(dim);
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string word;
        ls >> word;
        Eigen::VectorXd vec(dim);
        for (std::size_t i = 0; i < dim; ++i)
            if (!(ls >> vec[i]))
                throw ParseError(path + ":" + std::to_string(lineno) + ": expected " +
                                 std::to_string(dim) + " values for word '" + word + "'");
        table.add(word, vec);
    }
    if (table.size() != vocab)
        throw ParseError(path + ": header declares " + std::to_string(vocab) + " words, found " +
                         std::to_string(table.size()));
    return table;
}

std::vector<std::string> feature_layout(const std::vector<Lexicon>& lexicons) {
    std::vector<std::string> layout;
    for (const auto& lex : lexicons)
        for (const auto& e : lex.schema().emotions)
            layout.push_back(lex.schema().name + ":" + e);
    return layout;
}

EmotionVector emotion_features(const Document& doc, const std::vector<Lexicon>& lexicons) {
    EmotionVector out;
    out.layout = feature_layout(lexicons);
    out.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out.layout.size()));
    if (doc.tokens.empty()) return out;

    Eigen::Index offset = 0;
    for (const auto& lex : lexicons) {
        const auto dim = static_cast<Eigen::Index>(lex.dimension());
        for (const auto& token : doc.tokens) {
            std::uint32_t mask = lex.lookup_mask(token);
            while (mask) {
                int bit = __builtin_ctz(mask);
                out.values[offset + bit] += 1.0;
                mask &= mask - 1;
            }
        }
        offset += dim;
    }
    out.values /= static_cast<double>(doc.tokens.size());
    return out;
}

Eigen::MatrixXd emotion_feature_matrix(const Corpus& corpus, const std::vector<Lexicon>& lexicons) {
    const auto q = static_cast<Eigen::Index>(feature_dimension(lexicons));
    Eigen::MatrixXd m(static_cast<Eigen::Index>(corpus.size()), q);
    for (std::size_t i = 0; i < corpus.size(); ++i)
        m.row(static_cast<Eigen::Index>(i)) = emotion_features(corpus.documents[i], lexicons).values;
    return m;
}

BowFeatures bow_features(const Corpus& corpus, std::size_t min_df, std::size_t max_vocab) {
    std::map<std::string, std::size_t> df;
    for (const auto& doc : corpus.documents) {
        std::set<std::string> uniq(doc.tokens.begin(), doc.tokens.end());
        for (const auto& t : uniq) df[t]++;
    }
    // Most frequent first, lexicographic tie-break.
    std::vector<std::pair<std::string, std::size_t>> candidates;
    for (const auto& [word, count] : df)
        if (count >= min_df) candidates.emplace_back(word, count);
    std::stable_sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (candidates.size() > max_vocab) candidates.resize(max_vocab);
    if (candidates.empty()) throw ValidationError("bow_features: empty vocabulary");

    BowFeatures bow;
    std::map<std::string, int> index;
    for (const auto& [word, _] : candidates) {
        index[word] = static_cast<int>(bow.vocabulary.size());
        bow.vocabulary.push_back(word);
    }
    for (const auto& doc : corpus.documents) {
        std::map<int, int> counts;
        for (const auto& t : doc.tokens) {
            auto it = index.find(t);
            if (it != index.end()) counts[it->second]++;
        }
        bow.counts.emplace_back(counts.begin(), counts.end());
    }
    return bow;
}

Eigen::MatrixXd bow_dense(const BowFeatures& bow, std::size_t n_docs) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_docs),
                                              static_cast<Eigen::Index>(bow.vocabulary.size()));
    for (std::size_t i = 0; i < bow.counts.size(); ++i)
        for (auto [j, c] : bow.counts[i]) m(static_cast<Eigen::Index>(i), j) = c;
    return m;
}

Eigen::VectorXd avg_embedding(const Document& doc, const EmbeddingTable& table, bool skip_oov) {
    const auto d = static_cast<Eigen::Index>(table.dimension());
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
    // Designated OOV vector is the zero vector when OOVs are kept.
    std::size_t n = 0;
    for (const auto& t : doc.tokens) {
        int idx = table.index_of(t);
        if (idx >= 0) {
            sum += table.vector_at(idx);
            ++n;
        } else if (!skip_oov) {
            ++n;
        }
    }
    if (n == 0) return Eigen::VectorXd::Zero(d);
    return sum / static_cast<double>(n);
}

double lexical_mean_value(const Document& doc, const WordList& list) {
    if (doc.tokens.empty()) return 0.0;
    std::size_t hits = 0;
    for (const auto& t : doc.tokens)
        if (list.words.count(t)) ++hits;
    return static_cast<double>(hits) / static_cast<double>(doc.tokens.size());
}

double corpus_mean_value(const Corpus& corpus, const WordList& list) {
    if (corpus.documents.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& doc : corpus.documents) sum += lexical_mean_value(doc, list);
    return sum / static_cast<double>(corpus.size());
}

WordList load_word_list(const std::string& path, const std::string& name) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open word list: " + path);
    WordList list;
    list.name = name;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        list.words.insert(to_lower(line));
    }
    return list;
}

}  // namespace ein
