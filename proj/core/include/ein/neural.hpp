#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ein/corpus.hpp"
#include "ein/embedding.hpp"
#include "ein/features.hpp"
#include "ein/lexicon.hpp"

namespace ein {

enum class Activation { relu, tanh };
enum class OptimizerKind { adam, adadelta, rmsprop };
enum class OutputMode { softmax_multiclass, sigmoid_binary };

Activation activation_from_string(const std::string& s);
OptimizerKind optimizer_from_string(const std::string& s);
std::string to_string(Activation a);
std::string to_string(OptimizerKind o);
std::string to_string(OutputMode m);

struct EinConfig {
    int lstm_units = 32;
    int dense_a_units = 16;  // 0 disables the emotional branch (LSTM-only baseline)
    int dense_b_units = 32;
    int batch_size = 16;
    Activation hidden_activation = Activation::relu;
    OptimizerKind optimizer = OptimizerKind::adam;
    double learning_rate = 0.0;  // 0 -> optimizer default
    double drop_c = 0.0;         // after dense_a
    double drop_d = 0.0;         // after attention
    int max_sequence = 300;
    OutputMode output_mode = OutputMode::softmax_multiclass;
    bool remove_stop_words = true;
    bool trainable_embeddings = true;
    std::uint64_t seed = 42;
    int early_stop_patience = 5;
    int max_epochs = 200;

    void validate() const;
};

struct TrainHistory {
    std::vector<double> train_loss;
    std::vector<double> val_loss;
    std::vector<double> val_macro_f1;
    int stopped_epoch = 0;
    int best_epoch = 0;
    std::string to_json() const;
};

/// All trainable state of the two-branch network. Parameter shapes:
///   embedding V x d (+ shared OOV row), LSTM gates stacked [i;f;o;g],
///   attention scalar-score projection, dense_a over the emotion vector,
///   dense_b over the concatenation, linear output head.
class EinModel {
public:
    EinModel() = default;
    EinModel(const EinConfig& config, const EmbeddingTable& table,
             std::vector<std::string> class_names, int emotion_dim);

    const EinConfig& config() const { return config_; }
    const std::vector<std::string>& class_names() const { return class_names_; }
    int emotion_dim() const { return emotion_dim_; }
    int embed_dim() const { return embed_dim_; }
    const std::vector<std::string>& vocabulary() const { return vocab_; }

    // Token ids after optional stop-word removal and truncation; -1 = OOV.
    // An empty result (all stop words or empty doc) collapses to a single OOV id.
    std::vector<int> token_ids(const std::vector<std::string>& tokens) const;

    // Class probabilities (softmax) or a single sigmoid score. Dropout is
    // applied only when training and an RNG is supplied.
    Eigen::VectorXd forward(const std::vector<std::string>& tokens, const Eigen::VectorXd& emo,
                            bool training = false, std::mt19937_64* rng = nullptr) const;

    std::pair<std::string, Eigen::VectorXd> predict(const Document& doc,
                                                    const std::vector<Lexicon>& lexicons) const;

    // Named views over every trainable parameter, in a stable order shared by
    // gradients, optimizer state, and the checkpoint layout.
    std::vector<std::pair<std::string, Eigen::MatrixXd*>> parameters();
    std::vector<std::pair<std::string, const Eigen::MatrixXd*>> parameters() const;

    // Raw parameter storage, exposed for construction from checkpoints.
    Eigen::MatrixXd embedding;  // V x d
    Eigen::MatrixXd oov;        // 1 x d, always trainable
    Eigen::MatrixXd lstm_wx;    // 4u x d
    Eigen::MatrixXd lstm_wh;    // 4u x u
    Eigen::MatrixXd lstm_b;     // 4u x 1
    Eigen::MatrixXd att_w;      // u x 1
    Eigen::MatrixXd att_b;      // 1 x 1
    Eigen::MatrixXd dense_a_w;  // da x q
    Eigen::MatrixXd dense_a_b;  // da x 1
    Eigen::MatrixXd dense_b_w;  // db x (u + da)
    Eigen::MatrixXd dense_b_b;  // db x 1
    Eigen::MatrixXd out_w;      // C x db
    Eigen::MatrixXd out_b;      // C x 1

    // Attention weights and penultimate (dense_b) activation for a document,
    // computed without dropout.
    struct Introspection {
        Eigen::VectorXd attention_weights;
        Eigen::VectorXd context;
        Eigen::VectorXd penultimate;
        Eigen::VectorXd output;
    };
    Introspection introspect(const std::vector<std::string>& tokens,
                             const Eigen::VectorXd& emo) const;

    void rebuild_vocab_index();
    void set_metadata(EinConfig config, std::vector<std::string> vocab,
                      std::vector<std::string> class_names, int emotion_dim, int embed_dim);

private:
    friend class EinTrainer;

    EinConfig config_;
    std::vector<std::string> vocab_;
    std::map<std::string, int> vocab_index_;
    std::vector<std::string> class_names_;
    int emotion_dim_ = 0;
    int embed_dim_ = 0;
};

// Attention over a hidden-state sequence: tanh-projected scalar scores,
// softmax weights, convex combination of the states.
std::pair<Eigen::VectorXd, Eigen::VectorXd> attention(const Eigen::MatrixXd& hidden,
                                                      const Eigen::VectorXd& w, double b);

// Standard LSTM over an n x d input; returns all n hidden states (n x u).
// Gate blocks in [i; f; o; g] order, h_0 = c_0 = 0.
Eigen::MatrixXd lstm_forward(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& wx,
                             const Eigen::MatrixXd& wh, const Eigen::MatrixXd& b);

// Cross-entropy of a prediction against a target class index (softmax mode)
// or a {0,1} target (sigmoid mode). Probabilities clamped to [1e-7, 1-1e-7].
double loss(const Eigen::VectorXd& pred, int target, OutputMode mode);

struct TrainExample {
    std::vector<std::string> tokens;
    Eigen::VectorXd emotion;
    int target = 0;  // class index (softmax) or 0/1 (sigmoid)
};

std::vector<TrainExample> make_examples(const Corpus& corpus, const std::vector<Lexicon>& lexicons,
                                        const std::vector<std::string>& class_names,
                                        OutputMode mode);

class EinTrainer {
public:
    explicit EinTrainer(EinModel& model);

    // Mean loss over the batch; accumulates gradients into grads() when
    // requested. Dropout active iff a training RNG is passed.
    double batch_loss_and_grad(const std::vector<const TrainExample*>& batch, bool with_grad,
                               std::mt19937_64* dropout_rng);

    const std::vector<Eigen::MatrixXd>& grads() const { return grads_; }
    void zero_grads();

    TrainHistory train(const std::vector<TrainExample>& train_set,
                       const std::vector<TrainExample>& val_set);

    // Max relative error between analytic and central finite-difference
    // gradients over all parameters, on the given batch.
    double gradient_check(const std::vector<const TrainExample*>& batch, double epsilon);

private:
    double example_loss_and_grad(const TrainExample& ex, bool with_grad,
                                 std::mt19937_64* dropout_rng);

    EinModel& model_;
    std::vector<std::pair<std::string, Eigen::MatrixXd*>> params_;
    std::vector<Eigen::MatrixXd> grads_;
};

class Optimizer {
public:
    Optimizer(OptimizerKind kind, double learning_rate /* 0 = default */);
    void step(std::vector<std::pair<std::string, Eigen::MatrixXd*>>& params,
              const std::vector<Eigen::MatrixXd>& grads);

private:
    OptimizerKind kind_;
    double lr_;
    long t_ = 0;
    std::vector<Eigen::MatrixXd> m_, v_;
};

// Words dropped from the content branch when remove_stop_words is set.
const std::set<std::string>& stop_words();

// Checkpoint I/O: magic "EIN1", uint32 little-endian JSON header length,
// UTF-8 JSON header (config, vocab, classes, layer shapes and offsets), then
// little-endian float32 payload in header order.
void save_checkpoint(const EinModel& model, const std::string& path);
EinModel load_checkpoint(const std::string& path);

}  // namespace ein
