#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ein {

struct Baselines {
    std::vector<std::string> majority;
    std::vector<std::string> random;
};

// MC predicts the most frequent training label (lexicographic tie-break);
// RAN draws uniformly over the training label set with the given seed.
Baselines trivial_baselines(const std::vector<std::string>& train_labels, std::size_t test_size,
                            std::uint64_t seed);

enum class LinearKind { hinge_ovr, multinomial_logistic };

/// Per-class linear scorer over named features.
struct LinearModel {
    LinearKind kind = LinearKind::hinge_ovr;
    std::vector<std::string> classes;        // sorted
    std::vector<std::string> feature_names;
    Eigen::MatrixXd weights;  // classes x features
    Eigen::VectorXd bias;     // classes

    std::string predict(const Eigen::VectorXd& x) const;
    std::vector<std::string> predict_all(const Eigen::MatrixXd& x) const;
    // Calibrated class probabilities (multinomial_logistic only).
    Eigen::VectorXd probabilities(const Eigen::VectorXd& x) const;

    // (class -> feature name -> weight), for top-emotion extraction.
    std::map<std::string, std::map<std::string, double>> coefficients() const;

    std::string to_json() const;
    static LinearModel from_json(const std::string& json_text);
};

// One-vs-rest hinge loss with L2 regularization, seeded stochastic
// subgradient descent.
LinearModel train_linear_svm(const Eigen::MatrixXd& features,
                             const std::vector<std::string>& labels,
                             const std::vector<std::string>& feature_names, double c = 1.0,
                             int epochs = 100, std::uint64_t seed = 0);

// Mean cross-entropy plus L2 penalty; fills gradients when requested.
double multinomial_logistic_loss(const Eigen::MatrixXd& features, const std::vector<int>& targets,
                                 const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                                 double l2, Eigen::MatrixXd* grad_w, Eigen::VectorXd* grad_b);

// Multinomial logistic regression with L2, full-batch gradient descent.
LinearModel train_logistic_regression(const Eigen::MatrixXd& features,
                                      const std::vector<std::string>& labels,
                                      const std::vector<std::string>& feature_names,
                                      double l2 = 1e-4, int epochs = 500, std::uint64_t seed = 0);

struct TreeNode {
    int feature = -1;       // -1 marks a leaf
    double threshold = 0.0;
    int left = -1, right = -1;
    std::vector<std::size_t> histogram;  // per-class sample counts at a leaf
};

struct Tree {
    std::vector<TreeNode> nodes;  // node 0 is the root
    std::size_t leaf_for(const Eigen::VectorXd& x) const;
};

/// Bootstrap-aggregated CART trees with gini splits and per-split feature
/// subsampling. Prediction by majority vote, lexicographic tie-break.
struct RandomForest {
    std::vector<std::string> classes;  // sorted
    std::vector<Tree> trees;

    std::string predict(const Eigen::VectorXd& x) const;
    std::vector<std::string> predict_all(const Eigen::MatrixXd& x) const;
    // Per-class vote counts; sums to the number of trees.
    std::vector<std::size_t> votes(const Eigen::VectorXd& x) const;

    std::string to_json() const;
    static RandomForest from_json(const std::string& json_text);
};

struct ForestConfig {
    int n_trees = 100;
    int max_depth = 0;          // 0 = unlimited
    int feature_subsample = 0;  // 0 = sqrt(feature count)
    int min_leaf = 1;
    bool bootstrap = true;
    std::uint64_t seed = 0;
};

RandomForest train_random_forest(const Eigen::MatrixXd& features,
                                 const std::vector<std::string>& labels,
                                 const ForestConfig& config);

}  // namespace ein
