#include "ein/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include <json.hpp>

#include "ein/errors.hpp"

namespace ein {

namespace {

std::vector<std::string> sorted_classes(const std::vector<std::string>& labels) {
    std::set<std::string> s(labels.begin(), labels.end());
    return {s.begin(), s.end()};
}

std::vector<int> label_indices(const std::vector<std::string>& labels,
                               const std::vector<std::string>& classes) {
    std::vector<int> out;
    out.reserve(labels.size());
    for (const auto& l : labels) {
        auto it = std::lower_bound(classes.begin(), classes.end(), l);
        out.push_back(static_cast<int>(it - classes.begin()));
    }
    return out;
}

// splitmix64; used to derive independent per-tree seeds from the master seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + salt * 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace

Baselines trivial_baselines(const std::vector<std::string>& train_labels, std::size_t test_size,
                            std::uint64_t seed) {
    if (train_labels.empty()) throw ValidationError("trivial_baselines: empty training labels");
    std::map<std::string, std::size_t> counts;
    for (const auto& l : train_labels) counts[l]++;
    std::string majority;
    std::size_t best = 0;
    for (const auto& [label, c] : counts)
        if (c > best) {  // map order gives the lexicographic tie-break
            best = c;
            majority = label;
        }
    Baselines out;
    out.majority.assign(test_size, majority);

    std::vector<std::string> label_set;
    for (const auto& [label, c] : counts) label_set.push_back(label);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> dist(0, label_set.size() - 1);
    for (std::size_t i = 0; i < test_size; ++i) out.random.push_back(label_set[dist(rng)]);
    return out;
}

std::string LinearModel::predict(const Eigen::VectorXd& x) const {
    Eigen::VectorXd scores = weights * x + bias;
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < scores.size(); ++i)
        if (scores[i] > scores[best]) best = i;
    return classes[static_cast<std::size_t>(best)];
}

std::vector<std::string> LinearModel::predict_all(const Eigen::MatrixXd& x) const {
    std::vector<std::string> out;
    for (Eigen::Index i = 0; i < x.rows(); ++i) out.push_back(predict(x.row(i).transpose()));
    return out;
}

Eigen::VectorXd LinearModel::probabilities(const Eigen::VectorXd& x) const {
    if (kind != LinearKind::multinomial_logistic)
        throw ConfigError("probabilities are only calibrated for multinomial_logistic models");
    Eigen::VectorXd z = weights * x + bias;
    Eigen::VectorXd e = (z.array() - z.maxCoeff()).exp();
    return e / e.sum();
}

std::map<std::string, std::map<std::string, double>> LinearModel::coefficients() const {
    std::map<std::string, std::map<std::string, double>> out;
    for (std::size_t c = 0; c < classes.size(); ++c)
        for (std::size_t f = 0; f < feature_names.size(); ++f)
            out[classes[c]][feature_names[f]] =
                weights(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(f));
    return out;
}

std::string LinearModel::to_json() const {
    nlohmann::json j;
    j["format"] = "ein-linear-v1";
    j["kind"] = kind == LinearKind::hinge_ovr ? "hinge_ovr" : "multinomial_logistic";
    j["classes"] = classes;
    j["features"] = feature_names;
    j["bias"] = std::vector<double>(bias.data(), bias.data() + bias.size());
    j["weights"] = nlohmann::json::array();
    for (Eigen::Index c = 0; c < weights.rows(); ++c) {
        std::vector<double> row(weights.cols());
        for (Eigen::Index f = 0; f < weights.cols(); ++f) row[f] = weights(c, f);
        j["weights"].push_back(row);
    }
    return j.dump(2);
}

LinearModel LinearModel::from_json(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    if (j.at("format") != "ein-linear-v1") throw ParseError("unsupported linear model format");
    LinearModel m;
    m.kind = j.at("kind") == "hinge_ovr" ? LinearKind::hinge_ovr : LinearKind::multinomial_logistic;
    m.classes = j.at("classes").get<std::vector<std::string>>();
    m.feature_names = j.at("features").get<std::vector<std::string>>();
    auto bias = j.at("bias").get<std::vector<double>>();
    m.bias = Eigen::Map<Eigen::VectorXd>(bias.data(), static_cast<Eigen::Index>(bias.size()));
    auto rows = j.at("weights").get<std::vector<std::vector<double>>>();
    m.weights.resize(static_cast<Eigen::Index>(rows.size()),
                     static_cast<Eigen::Index>(m.feature_names.size()));
    for (std::size_t c = 0; c < rows.size(); ++c)
        for (std::size_t f = 0; f < rows[c].size(); ++f)
            m.weights(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(f)) = rows[c][f];
    return m;
}

LinearModel train_linear_svm(const Eigen::MatrixXd& features, const std::vector<std::string>& labels,
                             const std::vector<std::string>& feature_names, double c, int epochs,
                             std::uint64_t seed) {
    if (!features.allFinite()) throw ValidationError("train_linear_svm: non-finite feature");
    auto classes = sorted_classes(labels);
    if (classes.size() < 2) throw ValidationError("train_linear_svm: need at least 2 classes");
    auto y = label_indices(labels, classes);
    const auto n = features.rows();
    const auto d = features.cols();

    LinearModel model;
    model.kind = LinearKind::hinge_ovr;
    model.classes = classes;
    model.feature_names = feature_names;
    model.weights = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(classes.size()), d);
    model.bias = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(classes.size()));

    const double lambda = 1.0 / (c * double(n));
    for (std::size_t cls = 0; cls < classes.size(); ++cls) {
        std::mt19937_64 rng(mix_seed(seed, cls));
        Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
        double b = 0.0;
        std::vector<Eigen::Index> order(n);
        std::iota(order.begin(), order.end(), 0);
        long t = 0;
        for (int epoch = 0; epoch < epochs; ++epoch) {
            std::shuffle(order.begin(), order.end(), rng);
            for (Eigen::Index i : order) {
                ++t;
                double lr = 1.0 / (lambda * double(t));
                double target = y[static_cast<std::size_t>(i)] == int(cls) ? 1.0 : -1.0;
                double margin = target * (w.dot(features.row(i).transpose()) + b);
                w *= (1.0 - lr * lambda);
                b *= (1.0 - lr * lambda);  // regularized bias, decays like the weights
                if (margin < 1.0) {
                    w += lr * target * features.row(i).transpose();
                    b += lr * lambda * target;  // bias step kept on the lr scale of w's reg
                }
            }
        }
        model.weights.row(static_cast<Eigen::Index>(cls)) = w.transpose();
        model.bias[static_cast<Eigen::Index>(cls)] = b;
    }
    return model;
}

double multinomial_logistic_loss(const Eigen::MatrixXd& features, const std::vector<int>& targets,
                                 const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                                 double l2, Eigen::MatrixXd* grad_w, Eigen::VectorXd* grad_b) {
    const auto n = features.rows();
    const auto k = weights.rows();
    double loss = 0.0;
    if (grad_w) {
        grad_w->resize(weights.rows(), weights.cols());
        grad_w->setZero();
    }
    if (grad_b) {
        grad_b->resize(bias.size());
        grad_b->setZero();
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::VectorXd z = weights * features.row(i).transpose() + bias;
        Eigen::VectorXd e = (z.array() - z.maxCoeff()).exp();
        Eigen::VectorXd p = e / e.sum();
        int t = targets[static_cast<std::size_t>(i)];
        loss -= std::log(std::max(p[t], 1e-300));
        if (grad_w) {
            Eigen::VectorXd dz = p;
            dz[t] -= 1.0;
            *grad_w += dz * features.row(i);
            *grad_b += dz;
        }
    }
    loss /= double(n);
    loss += 0.5 * l2 * weights.squaredNorm();
    if (grad_w) {
        *grad_w /= double(n);
        *grad_w += l2 * weights;
        *grad_b /= double(n);
    }
    (void)k;
    return loss;
}

LinearModel train_logistic_regression(const Eigen::MatrixXd& features,
                                      const std::vector<std::string>& labels,
                                      const std::vector<std::string>& feature_names, double l2,
                                      int epochs, std::uint64_t seed) {
    if (!features.allFinite())
        throw ValidationError("train_logistic_regression: non-finite feature");
    auto classes = sorted_classes(labels);
    if (classes.size() < 2)
        throw ValidationError("train_logistic_regression: need at least 2 classes");
    auto y = label_indices(labels, classes);
    const auto k = static_cast<Eigen::Index>(classes.size());
    const auto d = features.cols();

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 0.01);
    Eigen::MatrixXd w(k, d);
    for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = gauss(rng);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(k);

    Eigen::MatrixXd gw(k, d);
    Eigen::VectorXd gb(k);
    const double lr = 1.0;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        multinomial_logistic_loss(features, y, w, b, l2, &gw, &gb);
        w -= lr * gw;
        b -= lr * gb;
    }

    LinearModel model;
    model.kind = LinearKind::multinomial_logistic;
    model.classes = classes;
    model.feature_names = feature_names;
    model.weights = w;
    model.bias = b;
    return model;
}

std::size_t Tree::leaf_for(const Eigen::VectorXd& x) const {
    std::size_t node = 0;
    while (nodes[node].feature >= 0)
        node = x[nodes[node].feature] <= nodes[node].threshold
                   ? static_cast<std::size_t>(nodes[node].left)
                   : static_cast<std::size_t>(nodes[node].right);
    return node;
}

namespace {

double gini(const std::vector<std::size_t>& counts, std::size_t total) {
    if (total == 0) return 0.0;
    double g = 1.0;
    for (std::size_t c : counts) {
        double p = double(c) / double(total);
        g -= p * p;
    }
    return g;
}

struct TreeBuilder {
    const Eigen::MatrixXd& x;
    const std::vector<int>& y;
    int n_classes;
    int max_depth;
    int feature_subsample;
    int min_leaf;
    std::mt19937_64 rng;
    Tree tree;

    int build(std::vector<std::size_t>& idx, int depth) {
        std::vector<std::size_t> hist(n_classes, 0);
        for (std::size_t i : idx) hist[static_cast<std::size_t>(y[i])]++;
        int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({});
        tree.nodes[node_id].histogram = hist;

        bool pure = std::count_if(hist.begin(), hist.end(), [](std::size_t c) { return c > 0; }) <= 1;
        if (pure || (max_depth > 0 && depth >= max_depth) ||
            idx.size() < static_cast<std::size_t>(2 * min_leaf)) {
            return node_id;
        }

        // Candidate features for this split.
        std::vector<int> feats(static_cast<std::size_t>(x.cols()));
        std::iota(feats.begin(), feats.end(), 0);
        std::shuffle(feats.begin(), feats.end(), rng);
        feats.resize(std::min<std::size_t>(feats.size(), static_cast<std::size_t>(feature_subsample)));
        std::sort(feats.begin(), feats.end());

        double parent_gini = gini(hist, idx.size());
        double best_gain = 0.0;
        int best_feature = -1;
        double best_threshold = 0.0;

        for (int f : feats) {
            std::vector<std::size_t> sorted = idx;
            std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
                return x(static_cast<Eigen::Index>(a), f) < x(static_cast<Eigen::Index>(b), f);
            });
            std::vector<std::size_t> left_hist(n_classes, 0);
            std::vector<std::size_t> right_hist = hist;
            for (std::size_t pos = 0; pos + 1 < sorted.size(); ++pos) {
                auto cls = static_cast<std::size_t>(y[sorted[pos]]);
                left_hist[cls]++;
                right_hist[cls]--;
                double v = x(static_cast<Eigen::Index>(sorted[pos]), f);
                double vn = x(static_cast<Eigen::Index>(sorted[pos + 1]), f);
                if (v == vn) continue;
                std::size_t nl = pos + 1, nr = sorted.size() - nl;
                if (nl < static_cast<std::size_t>(min_leaf) ||
                    nr < static_cast<std::size_t>(min_leaf))
                    continue;
                double gain = parent_gini - (double(nl) * gini(left_hist, nl) +
                                             double(nr) * gini(right_hist, nr)) /
                                                double(sorted.size());
                if (gain > best_gain + 1e-15) {
                    best_gain = gain;
                    best_feature = f;
                    best_threshold = 0.5 * (v + vn);
                }
            }
        }
        if (best_feature < 0) return node_id;

        std::vector<std::size_t> left_idx, right_idx;
        for (std::size_t i : idx) {
            if (x(static_cast<Eigen::Index>(i), best_feature) <= best_threshold)
                left_idx.push_back(i);
            else
                right_idx.push_back(i);
        }
        int left = build(left_idx, depth + 1);
        int right = build(right_idx, depth + 1);
        tree.nodes[node_id].feature = best_feature;
        tree.nodes[node_id].threshold = best_threshold;
        tree.nodes[node_id].left = left;
        tree.nodes[node_id].right = right;
        return node_id;
    }
};

}  // namespace

RandomForest train_random_forest(const Eigen::MatrixXd& features,
                                 const std::vector<std::string>& labels,
                                 const ForestConfig& config) {
    if (!features.allFinite()) throw ValidationError("train_random_forest: non-finite feature");
    auto classes = sorted_classes(labels);
    if (classes.size() < 2)
        throw ValidationError("train_random_forest: degenerate single-class input");
    auto y = label_indices(labels, classes);
    const auto n = static_cast<std::size_t>(features.rows());

    int subsample = config.feature_subsample > 0
                        ? config.feature_subsample
                        : std::max(1, int(std::sqrt(double(features.cols()))));

    RandomForest forest;
    forest.classes = classes;
    for (int t = 0; t < config.n_trees; ++t) {
        std::mt19937_64 rng(mix_seed(config.seed, static_cast<std::uint64_t>(t)));
        std::vector<std::size_t> idx;
        if (config.bootstrap) {
            std::uniform_int_distribution<std::size_t> dist(0, n - 1);
            for (std::size_t i = 0; i < n; ++i) idx.push_back(dist(rng));
        } else {
            idx.resize(n);
            std::iota(idx.begin(), idx.end(), 0);
        }
        TreeBuilder builder{features,        y,
                            int(classes.size()), config.max_depth,
                            subsample,       config.min_leaf,
                            std::mt19937_64(mix_seed(config.seed, 0x7265656eull + t)),
                            {}};
        builder.build(idx, 0);
        forest.trees.push_back(std::move(builder.tree));
    }
    return forest;
}

std::vector<std::size_t> RandomForest::votes(const Eigen::VectorXd& x) const {
    std::vector<std::size_t> v(classes.size(), 0);
    for (const auto& tree : trees) {
        const auto& hist = tree.nodes[tree.leaf_for(x)].histogram;
        std::size_t best = 0;
        for (std::size_t c = 1; c < hist.size(); ++c)
            if (hist[c] > hist[best]) best = c;
        v[best]++;
    }
    return v;
}

std::string RandomForest::predict(const Eigen::VectorXd& x) const {
    auto v = votes(x);
    std::size_t best = 0;
    for (std::size_t c = 1; c < v.size(); ++c)
        if (v[c] > v[best]) best = c;
    return classes[best];
}

std::vector<std::string> RandomForest::predict_all(const Eigen::MatrixXd& x) const {
    std::vector<std::string> out;
    for (Eigen::Index i = 0; i < x.rows(); ++i) out.push_back(predict(x.row(i).transpose()));
    return out;
}

std::string RandomForest::to_json() const {
    nlohmann::json j;
    j["format"] = "ein-forest-v1";
    j["classes"] = classes;
    j["trees"] = nlohmann::json::array();
    for (const auto& tree : trees) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const auto& node : tree.nodes)
            nodes.push_back({{"feature", node.feature},
                             {"threshold", node.threshold},
                             {"left", node.left},
                             {"right", node.right},
                             {"histogram", node.histogram}});
        j["trees"].push_back(nodes);
    }
    return j.dump();
}

RandomForest RandomForest::from_json(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    if (j.at("format") != "ein-forest-v1") throw ParseError("unsupported forest format");
    RandomForest forest;
    forest.classes = j.at("classes").get<std::vector<std::string>>();
    for (const auto& tj : j.at("trees")) {
        Tree tree;
        for (const auto& nj : tj) {
            TreeNode node;
            node.feature = nj.at("feature");
            node.threshold = nj.at("threshold");
            node.left = nj.at("left");
            node.right = nj.at("right");
            node.histogram = nj.at("histogram").get<std::vector<std::size_t>>();
            tree.nodes.push_back(std::move(node));
        }
        forest.trees.push_back(std::move(tree));
    }
    return forest;
}

}  // namespace ein
