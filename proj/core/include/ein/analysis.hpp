#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ein/corpus.hpp"
#include "ein/lexicon.hpp"
#include "ein/neural.hpp"

namespace ein {

struct FeatureRanking {
    // Sorted by score descending, lexicographic tie-break.
    std::vector<std::pair<std::string, double>> entries;
    std::string to_json() const;
};

// Entropy-based importance of each (binned) feature column: IG(f) =
// H(labels) - sum_b p(b) H(labels | b), natural log, equal-width bins over the
// observed [min, max] of each feature.
FeatureRanking information_gain(const Eigen::MatrixXd& features,
                                const std::vector<std::string>& feature_names,
                                const std::vector<std::string>& labels, int bins = 10);

struct WelchResult {
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;
    bool significant_05 = false;
    bool significant_01 = false;
};

WelchResult welch_t_test(const std::vector<double>& sample_a, const std::vector<double>& sample_b);

// Regularized incomplete beta I_x(a, b), exposed for the t-distribution tail.
double regularized_incomplete_beta(double a, double b, double x);

// Top-n emotions per class from named linear coefficients. Coordinate names of
// the form "Lexicon:emotion" are first aggregated to the emotion name by
// taking the max weight across lexicons.
std::map<std::string, std::vector<std::string>> top_n_emotions(
    const std::map<std::string, std::map<std::string, double>>& coefficients, std::size_t n = 3);

struct PcaResult {
    Eigen::MatrixXd projected;              // rows x k
    std::vector<double> explained_variance;  // ratios, non-increasing
};

// Mean-centered projection onto the top-k principal directions, computed by
// power iteration with deflation.
PcaResult pca_project(const std::vector<Eigen::VectorXd>& vectors, int k = 2,
                      std::uint64_t seed = 0);

// One CSV row per document: id, gold label, dense_b activation vector.
void export_penultimate(const EinModel& model, const Corpus& corpus,
                        const std::vector<Lexicon>& lexicons, const std::string& path);

}  // namespace ein
