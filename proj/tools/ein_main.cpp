// ein: config-driven experiment runner for the emotionally-infused
// false-information classifier and its analysis pipeline.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ein/analysis.hpp"
#include "ein/classifiers.hpp"
#include "ein/corpus.hpp"
#include "ein/errors.hpp"
#include "ein/experiment.hpp"
#include "ein/features.hpp"
#include "ein/metrics.hpp"
#include "ein/neural.hpp"

namespace fs = std::filesystem;

namespace {

ein::ExperimentConfig load_config(const std::string& path, const std::string& seed_override,
                                  const std::string& out_override) {
    auto config = ein::ExperimentConfig::from_file(path);
    if (!seed_override.empty()) config.set("seed", seed_override);
    if (!out_override.empty()) config.set("out", out_override);
    return config;
}

int run_prepare(const ein::ExperimentConfig& config) {
    config.validate();
    fs::create_directories(config.out_dir());
    std::string fmt = config.get_or("corpus_format", "jsonl");
    ein::Corpus raw = ein::load_corpus(
        config.get("corpus"), fmt == "csv" ? ein::CorpusFormat::csv : ein::CorpusFormat::jsonl);
    ein::PreprocessReport report;
    ein::Corpus prepared = ein::preprocess(
        raw, static_cast<std::size_t>(config.get_int("preprocess.max_tokens", 300)),
        static_cast<std::size_t>(config.get_int("preprocess.min_tokens", 1)),
        config.get_bool("preprocess.dedup", true), &report);

    std::ofstream out(config.out_dir() + "/prepared.jsonl");
    for (const auto& doc : prepared.documents) {
        nlohmann::json j{{"id", doc.id}, {"text", doc.text}, {"label", doc.label},
                         {"source", doc.source}};
        out << j.dump() << "\n";
    }
    std::ofstream rep(config.out_dir() + "/prepare_report.json");
    rep << report.to_json() << "\n";
    std::cout << "prepared " << prepared.size() << " documents -> " << config.out_dir()
              << "/prepared.jsonl\n";
    return 0;
}

int run_evaluate(const ein::ExperimentConfig& config, const std::string& model_path) {
    config.validate();
    fs::create_directories(config.out_dir());
    ein::Corpus corpus = ein::load_config_corpus(config);
    ein::SplitSpec spec;
    spec.test_fraction = config.get_double("split.test_fraction", 0.2);
    spec.validation_fraction = config.get_double("split.validation_fraction", 0.2);
    spec.stratified = config.get_bool("split.stratified", true);
    spec.seed = config.seed();
    ein::SplitResult parts = ein::split(corpus, spec);

    std::vector<std::string> predictions;
    std::ifstream probe(model_path, std::ios::binary);
    char magic[4] = {};
    probe.read(magic, 4);
    if (std::string(magic, 4) == "EIN1") {
        ein::EinModel model = ein::load_checkpoint(model_path);
        auto lexicons = ein::load_config_lexicons(config);
        for (const auto& doc : parts.test.documents)
            predictions.push_back(model.predict(doc, lexicons).first);
    } else {
        std::ifstream in(model_path);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        nlohmann::json j = nlohmann::json::parse(text);
        if (j.at("format") == "ein-forest-v1") {
            auto forest = ein::RandomForest::from_json(text);
            auto lexicons = ein::load_config_lexicons(config);
            predictions = forest.predict_all(ein::emotion_feature_matrix(parts.test, lexicons));
        } else {
            auto model = ein::LinearModel::from_json(text);
            auto lexicons = ein::load_config_lexicons(config);
            predictions = model.predict_all(ein::emotion_feature_matrix(parts.test, lexicons));
        }
    }
    ein::MetricsReport metrics = ein::compute_metrics(
        predictions, [&] {
            std::vector<std::string> gold;
            for (const auto& d : parts.test.documents) gold.push_back(d.label);
            return gold;
        }(), corpus.labels);
    std::ofstream out(config.out_dir() + "/metrics_eval.json");
    out << metrics.to_json() << "\n";
    std::cout << metrics.to_json() << "\n";
    return 0;
}

int run_stats(const ein::ExperimentConfig& config) {
    config.validate();
    ein::Corpus corpus = ein::load_config_corpus(config);
    std::cout << ein::corpus_stats(corpus).to_json() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"emotionally-infused false-information classification toolkit"};
    app.require_subcommand(1);

    std::string config_path, seed_override, out_override, model_path;
    app.add_option("--config", config_path, "experiment config file")->required();
    app.add_option("--seed", seed_override, "override the config seed");
    app.add_option("--out", out_override, "override the output directory");

    auto* prepare = app.add_subcommand("prepare", "load, clean, and write the prepared corpus");
    auto* train = app.add_subcommand("train", "run the full experiment: prepare/featurize/train/evaluate");
    auto* evaluate = app.add_subcommand("evaluate", "evaluate a saved model on the test split");
    evaluate->add_option("--model", model_path, "checkpoint (.ckpt) or model JSON")->required();
    auto* analyze = app.add_subcommand("analyze", "IG ranking, t-tests, top emotions, word lists");
    auto* project = app.add_subcommand("project", "penultimate embeddings + 2-d PCA projection");
    project->add_option("--model", model_path, "EIN checkpoint")->required();
    auto* stats = app.add_subcommand("stats", "per-class corpus statistics");

    CLI11_PARSE(app, argc, argv);

    try {
        auto config = load_config(config_path, seed_override, out_override);
        if (prepare->parsed()) return run_prepare(config);
        if (train->parsed()) {
            ein::run_experiment(config);
            std::cout << "experiment complete -> " << config.out_dir() << "\n";
            return 0;
        }
        if (evaluate->parsed()) return run_evaluate(config, model_path);
        if (analyze->parsed()) {
            ein::run_analysis(config);
            std::cout << "analysis complete -> " << config.out_dir() << "\n";
            return 0;
        }
        if (project->parsed()) {
            ein::run_projection(config, model_path);
            std::cout << "projection complete -> " << config.out_dir() << "\n";
            return 0;
        }
        if (stats->parsed()) return run_stats(config);
    } catch (const ein::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ein::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 3;
    } catch (const ein::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 3;
    } catch (const ein::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
