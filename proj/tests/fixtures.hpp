#pragma once

// Shared synthetic fixtures: tiny lexicons over the builtin schemas and
// seeded corpus generators with known class structure.

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "ein/corpus.hpp"
#include "ein/embedding.hpp"
#include "ein/lexicon.hpp"

namespace fixtures {

// Marker vocabulary: every emotion e gets words "<e>tok1..3", tagged with e
// in every schema that contains e.
inline std::vector<ein::Lexicon> tiny_lexicons() {
    std::vector<ein::Lexicon> out;
    for (const auto& schema : ein::builtin_schemas()) {
        ein::Lexicon lex(schema);
        for (const auto& e : schema.emotions)
            for (int i = 1; i <= 3; ++i) lex.add(e + "tok" + std::to_string(i), e);
        out.push_back(std::move(lex));
    }
    return out;
}

inline std::vector<std::string> write_tiny_lexicon_files(const std::string& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> paths;
    for (const auto& schema : ein::builtin_schemas()) {
        std::string path = dir + "/" + schema.name + ".tsv";
        std::ofstream out(path);
        out << "#schema: " << schema.name << "\n";
        for (const auto& e : schema.emotions)
            for (int i = 1; i <= 3; ++i) out << e << "tok" << i << "\t" << e << "\n";
        paths.push_back(path);
    }
    return paths;
}

struct ClassProfile {
    std::string label;
    std::string emotion;  // dominant marker emotion
};

inline const std::vector<ClassProfile>& five_class_profiles() {
    static const std::vector<ClassProfile> kProfiles = {
        {"clickbait", "surprise"}, {"hoax", "hope"},      {"propaganda", "joy"},
        {"satire", "disgust"},     {"real_news", "calmness"}};
    return kProfiles;
}

// Balanced 5-class corpus whose classes differ in emotion-word rates; when
// with_vocab is set, documents also carry a noisy class-specific vocabulary so
// the content branch has signal of its own.
inline ein::Corpus emotion_corpus(std::size_t n, std::uint64_t seed, bool with_vocab) {
    const auto& profiles = five_class_profiles();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> tok3(1, 3);
    std::uniform_int_distribution<int> filler30(0, 29);
    std::uniform_int_distribution<int> vocab5(0, 4);
    std::uniform_int_distribution<std::size_t> cls5(0, profiles.size() - 1);

    ein::Corpus corpus;
    corpus.provenance = "synthetic";
    for (std::size_t i = 0; i < n; ++i) {
        const auto& profile = profiles[i % profiles.size()];
        ein::Document doc;
        doc.id = "d" + std::to_string(i);
        doc.label = profile.label;
        doc.source = "news_articles";
        for (int t = 0; t < 25; ++t) {
            double r = unit(rng);
            if (r < 0.25) {
                doc.tokens.push_back(profile.emotion + "tok" + std::to_string(tok3(rng)));
            } else if (r < 0.30) {
                const auto& other = profiles[cls5(rng)];
                doc.tokens.push_back(other.emotion + "tok" + std::to_string(tok3(rng)));
            } else {
                doc.tokens.push_back("filler" + std::to_string(filler30(rng)));
            }
        }
        if (with_vocab) {
            for (int t = 0; t < 3; ++t) {
                double r = unit(rng);
                if (r < 0.5)
                    doc.tokens.push_back("voc" + profile.label + std::to_string(vocab5(rng)));
                else if (r < 0.65)
                    doc.tokens.push_back("voc" + profiles[cls5(rng)].label +
                                         std::to_string(vocab5(rng)));
            }
        }
        for (const auto& t : doc.tokens) doc.text += t + " ";
        corpus.labels.insert(doc.label);
        corpus.documents.push_back(std::move(doc));
    }
    return corpus;
}

// Separable binary headline corpus for the sigmoid/BCE path.
inline ein::Corpus clickbait_corpus(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> tok3(1, 3);
    std::uniform_int_distribution<int> filler20(0, 19);
    std::uniform_int_distribution<int> word5(0, 4);

    ein::Corpus corpus;
    corpus.provenance = "synthetic-headlines";
    for (std::size_t i = 0; i < n; ++i) {
        bool clickbait = i % 2 == 0;
        ein::Document doc;
        doc.id = "h" + std::to_string(i);
        doc.label = clickbait ? "clickbait" : "news";
        doc.source = "news_articles";
        for (int t = 0; t < 10; ++t) {
            double r = unit(rng);
            if (clickbait && r < 0.4)
                doc.tokens.push_back("surprisetok" + std::to_string(tok3(rng)));
            else if (clickbait && r < 0.7)
                doc.tokens.push_back("baitword" + std::to_string(word5(rng)));
            else if (!clickbait && r < 0.5)
                doc.tokens.push_back("plainword" + std::to_string(word5(rng)));
            else
                doc.tokens.push_back("filler" + std::to_string(filler20(rng)));
        }
        for (const auto& t : doc.tokens) doc.text += t + " ";
        corpus.labels.insert(doc.label);
        corpus.documents.push_back(std::move(doc));
    }
    return corpus;
}

// 16 documents, 4 classes, fully learnable token signatures.
inline ein::Corpus overfit_corpus(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> filler10(0, 9);
    const std::vector<std::string> classes = {"alpha", "beta", "gamma", "delta"};
    ein::Corpus corpus;
    corpus.provenance = "synthetic-overfit";
    int id = 0;
    for (const auto& cls : classes) {
        for (int i = 0; i < 4; ++i) {
            ein::Document doc;
            doc.id = "o" + std::to_string(id++);
            doc.label = cls;
            doc.source = "other";
            doc.tokens = {cls + "sig1", cls + "sig2", "filler" + std::to_string(filler10(rng)),
                          cls + "sig3", "filler" + std::to_string(filler10(rng))};
            for (const auto& t : doc.tokens) doc.text += t + " ";
            corpus.labels.insert(cls);
            corpus.documents.push_back(std::move(doc));
        }
    }
    return corpus;
}

inline ein::EmbeddingTable random_table_for(const ein::Corpus& corpus, std::size_t dim,
                                            std::uint64_t seed) {
    std::set<std::string> vocab;
    for (const auto& doc : corpus.documents) vocab.insert(doc.tokens.begin(), doc.tokens.end());
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-0.5, 0.5);
    ein::EmbeddingTable table(dim);
    for (const auto& w : vocab) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = dist(rng);
        table.add(w, v / std::sqrt(double(dim)));
    }
    return table;
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = (std::filesystem::temp_directory_path() /
                 ("ein_test_" + tag + "_" + std::to_string(::getpid())))
                    .string();
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

inline void write_jsonl(const ein::Corpus& corpus, const std::string& path) {
    std::ofstream out(path);
    for (const auto& doc : corpus.documents) {
        std::string text;
        for (const auto& t : doc.tokens) text += t + " ";
        out << "{\"id\":\"" << doc.id << "\",\"text\":\"" << text << "\",\"label\":\"" << doc.label
            << "\",\"source\":\"" << doc.source << "\"}\n";
    }
}

}  // namespace fixtures
