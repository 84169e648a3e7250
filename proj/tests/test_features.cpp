#include <doctest.h>

#include <algorithm>
#include <fstream>

#include "ein/errors.hpp"
#include "ein/features.hpp"
#include "fixtures.hpp"

using namespace ein;

namespace {

int layout_index(const std::vector<std::string>& layout, const std::string& name) {
    auto it = std::find(layout.begin(), layout.end(), name);
    REQUIRE(it != layout.end());
    return static_cast<int>(it - layout.begin());
}

}  // namespace

TEST_SUITE("features") {

TEST_CASE("layout covers 38 named coordinates in lexicon-then-schema order") {
    auto lexicons = fixtures::tiny_lexicons();
    auto layout = feature_layout(lexicons);
    REQUIRE(layout.size() == 38);
    CHECK(layout[0] == "EmoSenticNet:joy");
    CHECK(layout[6] == "EmoLex:joy");
    CHECK(layout[14] == "SentiSense:joy");
    CHECK(layout.back() == "Empath:fear");
}

TEST_CASE("normalized frequency: 2 joy tokens in 10 gives 0.2") {
    auto lexicons = fixtures::tiny_lexicons();
    Document doc;
    doc.tokens = {"joytok1", "joytok2", "x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8"};
    EmotionVector v = emotion_features(doc, lexicons);
    REQUIRE(v.values.size() == 38);
    CHECK(v.values[layout_index(v.layout, "EmoLex:joy")] == doctest::Approx(0.2));
    CHECK(v.values[layout_index(v.layout, "EmoSenticNet:joy")] == doctest::Approx(0.2));
    CHECK(v.values[layout_index(v.layout, "EmoLex:fear")] == doctest::Approx(0.0));
}

TEST_CASE("empty document yields the zero vector") {
    auto lexicons = fixtures::tiny_lexicons();
    Document doc;
    EmotionVector v = emotion_features(doc, lexicons);
    CHECK(v.values.size() == 38);
    CHECK(v.values.norm() == 0.0);
}

TEST_CASE("duplicating all tokens leaves the vector unchanged") {
    auto lexicons = fixtures::tiny_lexicons();
    Document doc;
    doc.tokens = {"surprisetok1", "filler", "hopetok2"};
    Document doubled = doc;
    doubled.tokens.insert(doubled.tokens.end(), doc.tokens.begin(), doc.tokens.end());
    EmotionVector a = emotion_features(doc, lexicons);
    EmotionVector b = emotion_features(doubled, lexicons);
    CHECK((a.values - b.values).norm() == doctest::Approx(0.0));
}

TEST_CASE("lexicon order permutes coordinates without changing named values") {
    auto lexicons = fixtures::tiny_lexicons();
    auto reversed = lexicons;
    std::reverse(reversed.begin(), reversed.end());
    Document doc;
    doc.tokens = {"joytok1", "feartok3", "calmnesstok2", "plain"};
    EmotionVector a = emotion_features(doc, lexicons);
    EmotionVector b = emotion_features(doc, reversed);
    REQUIRE(a.values.size() == b.values.size());
    for (std::size_t i = 0; i < a.layout.size(); ++i) {
        int j = layout_index(b.layout, a.layout[i]);
        CHECK(a.values[static_cast<Eigen::Index>(i)] == doctest::Approx(b.values[j]));
    }
}

TEST_CASE("feature matrix has one row per document") {
    auto lexicons = fixtures::tiny_lexicons();
    Corpus c = fixtures::emotion_corpus(15, 2, false);
    Eigen::MatrixXd m = emotion_feature_matrix(c, lexicons);
    CHECK(m.rows() == 15);
    CHECK(m.cols() == 38);
    EmotionVector v0 = emotion_features(c.documents[0], lexicons);
    CHECK((m.row(0).transpose() - v0.values).norm() == doctest::Approx(0.0));
}

TEST_CASE("bag of words counts and vocabulary") {
    Corpus c;
    c.documents = {Document{"1", "", {"a", "a", "b"}, "x", "other"},
                   Document{"2", "", {"b", "c"}, "y", "other"}};
    c.labels = {"x", "y"};
    BowFeatures bow = bow_features(c, 1, 100);
    std::set<std::string> vocab(bow.vocabulary.begin(), bow.vocabulary.end());
    CHECK(vocab == std::set<std::string>{"a", "b", "c"});

    Eigen::MatrixXd dense = bow_dense(bow, c.size());
    auto count = [&](int row, const std::string& word) {
        auto it = std::find(bow.vocabulary.begin(), bow.vocabulary.end(), word);
        REQUIRE(it != bow.vocabulary.end());
        return dense(row, it - bow.vocabulary.begin());
    };
    CHECK(count(0, "a") == 2.0);
    CHECK(count(0, "b") == 1.0);
    CHECK(count(0, "c") == 0.0);
    CHECK(count(1, "b") == 1.0);

    // min_df=2 keeps only "b"
    BowFeatures strict = bow_features(c, 2, 100);
    CHECK(strict.vocabulary == std::vector<std::string>{"b"});

    // determinism
    BowFeatures again = bow_features(c, 1, 100);
    CHECK(again.vocabulary == bow.vocabulary);
}

TEST_CASE("avg_embedding means and OOV handling") {
    EmbeddingTable table(2);
    table.add("w1", Eigen::Vector2d(1.0, 0.0));
    table.add("w2", Eigen::Vector2d(0.0, 1.0));

    Document doc;
    doc.tokens = {"w1", "w2"};
    Eigen::VectorXd v = avg_embedding(doc, table, true);
    CHECK(v[0] == doctest::Approx(0.5));
    CHECK(v[1] == doctest::Approx(0.5));

    doc.tokens = {"w1", "w1", "w2"};
    v = avg_embedding(doc, table, true);
    CHECK(v[0] == doctest::Approx(2.0 / 3.0));
    CHECK(v[1] == doctest::Approx(1.0 / 3.0));

    doc.tokens = {"unknown1", "unknown2"};
    CHECK(avg_embedding(doc, table, true).norm() == 0.0);

    // with skip_oov=false the OOV tokens dilute the mean
    doc.tokens = {"w1", "unknown"};
    v = avg_embedding(doc, table, false);
    CHECK(v[0] == doctest::Approx(0.5));
}

TEST_CASE("embedding file loader validates its header") {
    fixtures::TempDir dir("emb");
    std::string good = dir.path() + "/good.txt";
    {
        std::ofstream out(good);
        out << "2 3\n";
        out << "alpha 0.1 0.2 0.3\n";
        out << "beta -1 0 1\n";
    }
    EmbeddingTable t = load_embeddings(good);
    CHECK(t.size() == 2);
    CHECK(t.dimension() == 3);
    CHECK(t.index_of("beta") >= 0);
    CHECK(t.index_of("missing") == -1);
    CHECK(t.vector_at(t.index_of("alpha"))[2] == doctest::Approx(0.3));

    std::string bad = dir.path() + "/bad.txt";
    {
        std::ofstream out(bad);
        out << "3 3\n";
        out << "alpha 0.1 0.2 0.3\n";
    }
    CHECK_THROWS_AS(load_embeddings(bad), ParseError);
}

TEST_CASE("word-list mean values and corpus ordering") {
    WordList list{"strong", {"idiot", "fool"}};
    Document doc;
    doc.tokens = {"idiot", "a", "b", "c", "d", "e", "f", "g", "h", "i"};
    CHECK(lexical_mean_value(doc, list) == doctest::Approx(0.1));
    doc.tokens = {"calm", "words"};
    CHECK(lexical_mean_value(doc, list) == 0.0);

    // corpus with rarer list words vs corpus with denser list words
    auto mk = [](int listed, int filler) {
        Corpus c;
        for (int i = 0; i < 10; ++i) {
            Document d;
            d.id = std::to_string(i);
            d.label = "x";
            for (int j = 0; j < listed; ++j) d.tokens.push_back("idiot");
            for (int j = 0; j < filler; ++j) d.tokens.push_back("w" + std::to_string(j));
            c.labels.insert("x");
            c.documents.push_back(std::move(d));
        }
        return c;
    };
    Corpus news = mk(1, 399);     // rate 1/400
    Corpus twitter = mk(1, 99);   // rate 1/100
    CHECK(corpus_mean_value(news, list) < corpus_mean_value(twitter, list));
}

TEST_CASE("word-list file loader") {
    fixtures::TempDir dir("wl");
    std::string path = dir.path() + "/words.txt";
    {
        std::ofstream out(path);
        out << "# comment\nidiot\nFool\n\n";
    }
    WordList list = load_word_list(path, "strong");
    CHECK(list.name == "strong");
    CHECK(list.words == std::set<std::string>{"idiot", "fool"});
}

}  // TEST_SUITE
