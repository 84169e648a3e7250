#include "ein/experiment.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ein/analysis.hpp"
#include "ein/classifiers.hpp"
#include "ein/errors.hpp"
#include "ein/features.hpp"
#include "ein/metrics.hpp"

namespace fs = std::filesystem;

namespace ein {

namespace {

std::string trim(std::string s) {
    s.erase(0, s.find_first_not_of(" \t\r"));
    s.erase(s.find_last_not_of(" \t\r") + 1);
    return s;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open for writing: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw ParseError("write failed: " + path);
}

}  // namespace

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot hash missing file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return fnv1a_hex(ss.str());
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str());
}

ExperimentConfig ExperimentConfig::from_string(const std::string& text) {
    ExperimentConfig config;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected 'key = value', got: " + t);
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        config.entries_[key] = value;
    }
    return config;
}

bool ExperimentConfig::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string ExperimentConfig::get(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("missing config key: " + key);
    return it->second;
}

std::string ExperimentConfig::get_or(const std::string& key, const std::string& fallback) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second;
}

long ExperimentConfig::get_int(const std::string& key, long fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    try {
        return std::stol(it->second);
    } catch (...) {
        throw ConfigError("config key '" + key + "' is not an integer: " + it->second);
    }
}

double ExperimentConfig::get_double(const std::string& key, double fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    try {
        return std::stod(it->second);
    } catch (...) {
        throw ConfigError("config key '" + key + "' is not a number: " + it->second);
    }
}

bool ExperimentConfig::get_bool(const std::string& key, bool fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
    if (it->second == "false" || it->second == "0" || it->second == "no") return false;
    throw ConfigError("config key '" + key + "' is not a boolean: " + it->second);
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
    entries_[key] = value;
}

std::uint64_t ExperimentConfig::seed() const {
    if (!has("seed")) throw ConfigError("config requires a 'seed' key");
    return static_cast<std::uint64_t>(std::stoull(get("seed")));
}

std::string ExperimentConfig::out_dir() const { return get_or("out", "out"); }

std::string ExperimentConfig::hash() const {
    std::string canonical;
    for (const auto& [k, v] : entries_) canonical += k + "=" + v + "\n";
    return fnv1a_hex(canonical);
}

void ExperimentConfig::validate() const {
    seed();  // mandatory
    for (const auto& [key, value] : entries_) {
        bool path_key = key == "corpus" || key == "corpus_b" || key == "embeddings" ||
                        key.rfind("lexicon.", 0) == 0 || key.rfind("wordlist.", 0) == 0;
        if (path_key && !fs::exists(value))
            throw ConfigError("config key '" + key + "' points to a missing path: " + value);
    }
}

std::vector<Lexicon> load_config_lexicons(const ExperimentConfig& config) {
    std::vector<Lexicon> lexicons;
    for (const auto& schema : builtin_schemas()) {
        std::string key = "lexicon." + schema.name;
        if (config.has(key)) lexicons.push_back(load_lexicon(config.get(key), schema));
    }
    if (lexicons.empty()) throw ConfigError("no lexicon.<Schema> keys configured");
    return lexicons;
}

Corpus load_config_corpus(const ExperimentConfig& config, const std::string& key) {
    std::string fmt = config.get_or("corpus_format", "jsonl");
    CorpusFormat format;
    if (fmt == "jsonl")
        format = CorpusFormat::jsonl;
    else if (fmt == "csv")
        format = CorpusFormat::csv;
    else
        throw ConfigError("unknown corpus_format: " + fmt);
    Corpus raw = load_corpus(config.get(key), format);
    return preprocess(raw, static_cast<std::size_t>(config.get_int("preprocess.max_tokens", 300)),
                      static_cast<std::size_t>(config.get_int("preprocess.min_tokens", 1)),
                      config.get_bool("preprocess.dedup", true));
}

EmbeddingTable resolve_embeddings(const ExperimentConfig& config, const Corpus& corpus) {
    if (config.has("embeddings")) return load_embeddings(config.get("embeddings"));
    // No pretrained table: seeded random vectors over the corpus vocabulary.
    auto dim = static_cast<std::size_t>(config.get_int("embedding_dim", 32));
    std::set<std::string> vocab;
    for (const auto& doc : corpus.documents) vocab.insert(doc.tokens.begin(), doc.tokens.end());
    std::mt19937_64 rng(config.seed() ^ 0xe1b1ull);
    std::uniform_real_distribution<double> dist(-0.5, 0.5);
    EmbeddingTable table(dim);
    for (const auto& w : vocab) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = dist(rng);
        table.add(w, v / std::sqrt(double(dim)));
    }
    return table;
}

EinConfig ein_config_from(const ExperimentConfig& config, bool binary) {
    EinConfig c;
    c.lstm_units = static_cast<int>(config.get_int("ein.lstm_units", 32));
    c.dense_a_units = static_cast<int>(config.get_int("ein.dense_a_units", 16));
    c.dense_b_units = static_cast<int>(config.get_int("ein.dense_b_units", 32));
    c.batch_size = static_cast<int>(config.get_int("ein.batch_size", 16));
    c.hidden_activation = activation_from_string(config.get_or("ein.activation", "relu"));
    c.optimizer = optimizer_from_string(config.get_or("ein.optimizer", "adam"));
    c.learning_rate = config.get_double("ein.learning_rate", 0.0);
    c.drop_c = config.get_double("ein.drop_c", 0.0);
    c.drop_d = config.get_double("ein.drop_d", 0.0);
    c.max_sequence = static_cast<int>(config.get_int("ein.max_sequence", 300));
    c.output_mode = binary ? OutputMode::sigmoid_binary : OutputMode::softmax_multiclass;
    c.remove_stop_words = config.get_bool("ein.remove_stop_words", true);
    c.trainable_embeddings = config.get_bool("ein.trainable_embeddings", true);
    c.seed = config.seed();
    c.early_stop_patience = static_cast<int>(config.get_int("ein.patience", 5));
    c.max_epochs = static_cast<int>(config.get_int("ein.max_epochs", 50));
    c.validate();
    return c;
}

namespace {

struct Manifest {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> artifacts;  // (path, hash)
    std::map<std::string, double> timings_seconds;
    bool complete = false;
    std::string failed_stage;

    std::string to_json() const {
        nlohmann::json j;
        j["config_hash"] = config_hash;
        j["seed"] = seed;
        j["artifacts"] = nlohmann::json::object();
        for (const auto& [path, hash] : artifacts) j["artifacts"][path] = hash;
        j["timings_seconds"] = timings_seconds;
        j["complete"] = complete;
        if (!failed_stage.empty()) j["failed_stage"] = failed_stage;
        return j.dump(2);
    }
};

class StageClock {
public:
    explicit StageClock(Manifest& m) : manifest_(m) {}
    template <typename F>
    void run(const std::string& stage, F&& f) {
        auto start = std::chrono::steady_clock::now();
        try {
            f();
        } catch (...) {
            manifest_.failed_stage = stage;
            throw;
        }
        manifest_.timings_seconds[stage] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }

private:
    Manifest& manifest_;
};

// BOW transform with a fixed training vocabulary.
Eigen::MatrixXd bow_transform(const Corpus& corpus, const std::vector<std::string>& vocabulary) {
    std::map<std::string, int> index;
    for (std::size_t i = 0; i < vocabulary.size(); ++i)
        index[vocabulary[i]] = static_cast<int>(i);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(corpus.size()),
                                              static_cast<Eigen::Index>(vocabulary.size()));
    for (std::size_t i = 0; i < corpus.size(); ++i)
        for (const auto& t : corpus.documents[i].tokens) {
            auto it = index.find(t);
            if (it != index.end()) m(static_cast<Eigen::Index>(i), it->second) += 1.0;
        }
    return m;
}

std::vector<std::string> gold_labels(const Corpus& corpus) {
    std::vector<std::string> out;
    for (const auto& d : corpus.documents) out.push_back(d.label);
    return out;
}

}  // namespace

void run_experiment(const ExperimentConfig& config) {
    config.validate();
    const std::string out_dir = config.out_dir();
    fs::create_directories(out_dir);

    Manifest manifest;
    manifest.config_hash = config.hash();
    manifest.seed = config.seed();
    StageClock clock(manifest);

    auto finalize = [&](bool ok) {
        manifest.complete = ok;
        write_file(out_dir + "/manifest.json", manifest.to_json());
    };

    try {
        Corpus corpus;
        clock.run("prepare", [&] { corpus = load_config_corpus(config); });

        SplitSpec spec;
        spec.test_fraction = config.get_double("split.test_fraction", 0.2);
        spec.validation_fraction = config.get_double("split.validation_fraction", 0.2);
        spec.stratified = config.get_bool("split.stratified", true);
        spec.seed = config.seed();
        SplitResult parts = split(corpus, spec);

        const std::string model_kind = config.get_or("model", "ein");
        MetricsReport metrics;
        std::set<std::string> label_set = corpus.labels;

        if (model_kind == "mc" || model_kind == "ran") {
            clock.run("train", [&] {});
            clock.run("evaluate", [&] {
                auto base = trivial_baselines(gold_labels(parts.train), parts.test.size(),
                                              config.seed());
                metrics = compute_metrics(model_kind == "mc" ? base.majority : base.random,
                                          gold_labels(parts.test), label_set);
            });
        } else if (model_kind == "rf" || model_kind == "svm" || model_kind == "logreg") {
            std::vector<Lexicon> lexicons;
            Eigen::MatrixXd train_x, test_x;
            std::vector<std::string> feature_names;
            // Classical models train on train+validation (no early stopping).
            Corpus fit = parts.train;
            for (const auto& d : parts.validation.documents) fit.documents.push_back(d);
            fit.labels = corpus.labels;

            clock.run("featurize", [&] {
                const std::string feats = config.get_or("features", "emotion");
                if (feats == "emotion") {
                    lexicons = load_config_lexicons(config);
                    feature_names = feature_layout(lexicons);
                    train_x = emotion_feature_matrix(fit, lexicons);
                    test_x = emotion_feature_matrix(parts.test, lexicons);
                } else if (feats == "bow") {
                    auto bow = bow_features(
                        fit, static_cast<std::size_t>(config.get_int("bow.min_df", 2)),
                        static_cast<std::size_t>(config.get_int("bow.max_vocab", 20000)));
                    feature_names = bow.vocabulary;
                    train_x = bow_dense(bow, fit.size());
                    test_x = bow_transform(parts.test, bow.vocabulary);
                } else if (feats == "embedding") {
                    EmbeddingTable table = resolve_embeddings(config, fit);
                    auto d = static_cast<Eigen::Index>(table.dimension());
                    for (Eigen::Index i = 0; i < d; ++i)
                        feature_names.push_back("dim" + std::to_string(i));
                    train_x.resize(static_cast<Eigen::Index>(fit.size()), d);
                    for (std::size_t i = 0; i < fit.size(); ++i)
                        train_x.row(static_cast<Eigen::Index>(i)) =
                            avg_embedding(fit.documents[i], table, true).transpose();
                    test_x.resize(static_cast<Eigen::Index>(parts.test.size()), d);
                    for (std::size_t i = 0; i < parts.test.size(); ++i)
                        test_x.row(static_cast<Eigen::Index>(i)) =
                            avg_embedding(parts.test.documents[i], table, true).transpose();
                } else {
                    throw ConfigError("unknown features kind: " + feats);
                }
            });

            std::vector<std::string> predictions;
            clock.run("train", [&] {
                if (model_kind == "rf") {
                    ForestConfig fc;
                    fc.n_trees = static_cast<int>(config.get_int("rf.n_trees", 100));
                    fc.max_depth = static_cast<int>(config.get_int("rf.max_depth", 0));
                    fc.feature_subsample =
                        static_cast<int>(config.get_int("rf.feature_subsample", 0));
                    fc.seed = config.seed();
                    auto forest = train_random_forest(train_x, gold_labels(fit), fc);
                    write_file(out_dir + "/model.json", forest.to_json());
                    predictions = forest.predict_all(test_x);
                } else if (model_kind == "svm") {
                    auto model = train_linear_svm(train_x, gold_labels(fit), feature_names,
                                                  config.get_double("svm.c", 1.0),
                                                  static_cast<int>(config.get_int("svm.epochs", 50)),
                                                  config.seed());
                    write_file(out_dir + "/model.json", model.to_json());
                    predictions = model.predict_all(test_x);
                } else {
                    auto model = train_logistic_regression(
                        train_x, gold_labels(fit), feature_names,
                        config.get_double("logreg.l2", 1e-4),
                        static_cast<int>(config.get_int("logreg.epochs", 300)), config.seed());
                    write_file(out_dir + "/model.json", model.to_json());
                    predictions = model.predict_all(test_x);
                }
            });
            manifest.artifacts.emplace_back("model.json", file_hash(out_dir + "/model.json"));

            clock.run("evaluate", [&] {
                metrics = compute_metrics(predictions, gold_labels(parts.test), label_set);
            });
        } else if (model_kind == "ein" || model_kind == "lstm") {
            std::vector<Lexicon> lexicons = load_config_lexicons(config);
            bool binary = config.get_or("ein.output_mode", "softmax") == "sigmoid";
            EinConfig ein_cfg = ein_config_from(config, binary);
            if (model_kind == "lstm") ein_cfg.dense_a_units = 0;

            EinModel model;
            TrainHistory history;
            clock.run("train", [&] {
                EmbeddingTable table = resolve_embeddings(config, parts.train);
                std::vector<std::string> class_names(corpus.labels.begin(), corpus.labels.end());
                model = EinModel(ein_cfg, table, class_names,
                                 static_cast<int>(feature_dimension(lexicons)));
                auto train_set =
                    make_examples(parts.train, lexicons, class_names, ein_cfg.output_mode);
                auto val_set =
                    make_examples(parts.validation, lexicons, class_names, ein_cfg.output_mode);
                EinTrainer trainer(model);
                history = trainer.train(train_set, val_set);
                save_checkpoint(model, out_dir + "/ein.ckpt");
                write_file(out_dir + "/history.json", history.to_json());
            });
            manifest.artifacts.emplace_back("ein.ckpt", file_hash(out_dir + "/ein.ckpt"));
            manifest.artifacts.emplace_back("history.json", file_hash(out_dir + "/history.json"));

            clock.run("evaluate", [&] {
                std::vector<std::string> predictions;
                for (const auto& doc : parts.test.documents)
                    predictions.push_back(model.predict(doc, lexicons).first);
                metrics = compute_metrics(predictions, gold_labels(parts.test), label_set);
            });
        } else {
            throw ConfigError("unknown model kind: " + model_kind);
        }

        write_file(out_dir + "/metrics.json", metrics.to_json());
        manifest.artifacts.emplace_back("metrics.json", file_hash(out_dir + "/metrics.json"));
        finalize(true);
    } catch (...) {
        finalize(false);
        throw;
    }
}

namespace {

// Max-aggregated 17-emotion view of a coordinate feature matrix.
std::pair<Eigen::MatrixXd, std::vector<std::string>> aggregate_emotions(
    const Eigen::MatrixXd& features, const std::vector<std::string>& layout) {
    std::vector<std::string> emotions;
    std::map<std::string, std::vector<Eigen::Index>> groups;
    for (std::size_t i = 0; i < layout.size(); ++i) {
        std::string emotion = layout[i].substr(layout[i].find(':') + 1);
        if (!groups.count(emotion)) emotions.push_back(emotion);
        groups[emotion].push_back(static_cast<Eigen::Index>(i));
    }
    std::sort(emotions.begin(), emotions.end());
    Eigen::MatrixXd out(features.rows(), static_cast<Eigen::Index>(emotions.size()));
    for (std::size_t e = 0; e < emotions.size(); ++e) {
        Eigen::VectorXd col = Eigen::VectorXd::Constant(features.rows(), -1e300);
        for (Eigen::Index src : groups[emotions[e]]) col = col.cwiseMax(features.col(src));
        out.col(static_cast<Eigen::Index>(e)) = col;
    }
    return {out, emotions};
}

}  // namespace

void run_analysis(const ExperimentConfig& config) {
    config.validate();
    const std::string out_dir = config.out_dir();
    fs::create_directories(out_dir);

    Corpus corpus = load_config_corpus(config);
    std::vector<Lexicon> lexicons = load_config_lexicons(config);
    Eigen::MatrixXd features = emotion_feature_matrix(corpus, lexicons);
    std::vector<std::string> layout = feature_layout(lexicons);
    std::vector<std::string> labels = gold_labels(corpus);

    // Information gain, over coordinates or the aggregated 17-emotion view.
    {
        const std::string view = config.get_or("analysis.ig_view", "coordinates");
        FeatureRanking ranking;
        int bins = static_cast<int>(config.get_int("analysis.ig_bins", 10));
        if (view == "aggregated") {
            auto [agg, names] = aggregate_emotions(features, layout);
            ranking = information_gain(agg, names, labels, bins);
        } else {
            ranking = information_gain(features, layout, labels, bins);
        }
        write_file(out_dir + "/ig_ranking.json", ranking.to_json());
    }

    // Welch t-tests per aggregated emotion: real vs all false types.
    {
        nlohmann::json j;
        const std::string real_label = config.get_or("analysis.real_label", "real_news");
        if (corpus.labels.size() < 2) {
            j["skipped"] = "corpus has fewer than two classes; t-tests not applicable";
        } else if (!corpus.labels.count(real_label)) {
            j["skipped"] = "real label '" + real_label + "' absent from corpus";
        } else {
            auto [agg, names] = aggregate_emotions(features, layout);
            j["real_label"] = real_label;
            j["tests"] = nlohmann::json::array();
            for (std::size_t e = 0; e < names.size(); ++e) {
                std::vector<double> real_vals, false_vals;
                for (Eigen::Index i = 0; i < agg.rows(); ++i) {
                    double v = agg(i, static_cast<Eigen::Index>(e));
                    (labels[static_cast<std::size_t>(i)] == real_label ? real_vals : false_vals)
                        .push_back(v);
                }
                WelchResult r = welch_t_test(real_vals, false_vals);
                j["tests"].push_back({{"emotion", names[e]},
                                      {"t", r.t},
                                      {"df", r.df},
                                      {"p", r.p},
                                      {"significant_0.05", r.significant_05},
                                      {"significant_0.01", r.significant_01}});
            }
        }
        write_file(out_dir + "/t_tests.json", j.dump(2));
    }

    // Top-N emotions per class from linear-SVM coefficients.
    {
        nlohmann::json j;
        if (corpus.labels.size() < 2) {
            j["skipped"] = "corpus has fewer than two classes";
        } else {
            auto svm = train_linear_svm(features, labels, layout,
                                        config.get_double("svm.c", 1.0),
                                        static_cast<int>(config.get_int("svm.epochs", 50)),
                                        config.seed());
            auto top = top_n_emotions(svm.coefficients(),
                                      static_cast<std::size_t>(config.get_int("analysis.top_n", 3)));
            for (const auto& [cls, emotions] : top) j[cls] = emotions;
        }
        write_file(out_dir + "/top_emotions.json", j.dump(2));
    }

    // Word-list mean values, optionally compared against a second corpus.
    {
        nlohmann::json j = nlohmann::json::object();
        std::optional<Corpus> corpus_b;
        if (config.has("corpus_b")) corpus_b = load_config_corpus(config, "corpus_b");
        for (const auto& [key, path] : config.entries()) {
            if (key.rfind("wordlist.", 0) != 0) continue;
            std::string name = key.substr(std::string("wordlist.").size());
            WordList list = load_word_list(path, name);
            nlohmann::json entry;
            entry["corpus_mean"] = corpus_mean_value(corpus, list);
            if (corpus_b) {
                entry["corpus_b_mean"] = corpus_mean_value(*corpus_b, list);
                double a = entry["corpus_mean"], b = entry["corpus_b_mean"];
                entry["ordering"] = a < b ? "corpus < corpus_b"
                                          : (a > b ? "corpus > corpus_b" : "equal");
            }
            j[name] = entry;
        }
        write_file(out_dir + "/wordlists.json", j.dump(2));
    }
}

void run_projection(const ExperimentConfig& config, const std::string& checkpoint_path) {
    config.validate();
    const std::string out_dir = config.out_dir();
    fs::create_directories(out_dir);

    EinModel model = load_checkpoint(checkpoint_path);
    Corpus corpus = load_config_corpus(config);
    std::vector<Lexicon> lexicons = load_config_lexicons(config);

    export_penultimate(model, corpus, lexicons, out_dir + "/penultimate.csv");

    std::vector<Eigen::VectorXd> vectors;
    for (const auto& doc : corpus.documents) {
        Eigen::VectorXd emo = model.config().dense_a_units > 0
                                  ? emotion_features(doc, lexicons).values
                                  : Eigen::VectorXd::Zero(model.emotion_dim());
        vectors.push_back(model.introspect(doc.tokens, emo).penultimate);
    }
    PcaResult pca = pca_project(vectors, 2, config.seed());

    std::ostringstream out;
    out << "id,label,x,y\n";
    out.precision(9);
    for (std::size_t i = 0; i < corpus.size(); ++i)
        out << corpus.documents[i].id << "," << corpus.documents[i].label << ","
            << pca.projected(static_cast<Eigen::Index>(i), 0) << ","
            << pca.projected(static_cast<Eigen::Index>(i), 1) << "\n";
    write_file(out_dir + "/projection.csv", out.str());
}

}  // namespace ein
