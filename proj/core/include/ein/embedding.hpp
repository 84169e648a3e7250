#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace ein {

/// Word -> dense vector table. First file line is `<vocab_size> <dimension>`,
/// then `word v1 v2 ... vd` per line.
class EmbeddingTable {
public:
    EmbeddingTable() = default;
    EmbeddingTable(std::size_t dimension) : dimension_(dimension) {}

    std::size_t dimension() const { return dimension_; }
    std::size_t size() const { return words_.size(); }
    const std::vector<std::string>& words() const { return words_; }

    void add(const std::string& word, const Eigen::VectorXd& vec);
    // -1 when absent.
    int index_of(const std::string& word) const;
    const Eigen::VectorXd& vector_at(int index) const { return vectors_[index]; }

private:
    std::size_t dimension_ = 0;
    std::vector<std::string> words_;
    std::vector<Eigen::VectorXd> vectors_;
    std::unordered_map<std::string, int> index_;
};

EmbeddingTable load_embeddings(const std::string& path);

}  // namespace ein
