#include "ein/neural.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ein/errors.hpp"
#include <json.hpp>

#include "ein/metrics.hpp"

namespace ein {

namespace {

constexpr double kProbEps = 1e-7;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Eigen::VectorXd softmax(const Eigen::VectorXd& z) {
    Eigen::VectorXd e = (z.array() - z.maxCoeff()).exp();
    return e / e.sum();
}

Eigen::VectorXd apply_activation(const Eigen::VectorXd& x, Activation a) {
    if (a == Activation::relu) return x.cwiseMax(0.0);
    return x.array().tanh();
}

Eigen::VectorXd activation_grad(const Eigen::VectorXd& pre, const Eigen::VectorXd& post,
                                Activation a) {
    if (a == Activation::relu)
        return (pre.array() > 0.0).cast<double>();
    return 1.0 - post.array().square();
}

}  // namespace

Activation activation_from_string(const std::string& s) {
    if (s == "relu") return Activation::relu;
    if (s == "tanh") return Activation::tanh;
    throw ConfigError("unknown activation: " + s);
}

OptimizerKind optimizer_from_string(const std::string& s) {
    if (s == "adam") return OptimizerKind::adam;
    if (s == "adadelta") return OptimizerKind::adadelta;
    if (s == "rmsprop") return OptimizerKind::rmsprop;
    throw ConfigError("unknown optimizer: " + s);
}

std::string to_string(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }

std::string to_string(OptimizerKind o) {
    switch (o) {
        case OptimizerKind::adam: return "adam";
        case OptimizerKind::adadelta: return "adadelta";
        case OptimizerKind::rmsprop: return "rmsprop";
    }
    return "?";
}

std::string to_string(OutputMode m) {
    return m == OutputMode::softmax_multiclass ? "softmax_multiclass" : "sigmoid_binary";
}

void EinConfig::validate() const {
    if (lstm_units < 1 || dense_b_units < 1 || batch_size < 1 || max_sequence < 1 ||
        dense_a_units < 0)
        throw ConfigError("EinConfig: unit/batch/sequence counts must be positive");
    if (drop_c < 0 || drop_c >= 1 || drop_d < 0 || drop_d >= 1)
        throw ConfigError("EinConfig: dropout probabilities must lie in [0,1)");
    if (early_stop_patience < 0 || max_epochs < 1)
        throw ConfigError("EinConfig: patience must be >= 0 and max_epochs >= 1");
}

const std::set<std::string>& stop_words() {
    static const std::set<std::string> kStopWords = {
        "a",    "an",   "and",  "are",  "as",    "at",   "be",   "but",  "by",   "for", "from",
        "had",  "has",  "have", "he",   "her",   "his",  "i",    "in",   "is",   "it",  "its",
        "not",  "of",   "on",   "or",   "she",   "that", "the",  "their", "then", "there",
        "they", "this", "to",   "was",  "were",  "will", "with", "you"};
    return kStopWords;
}

EinModel::EinModel(const EinConfig& config, const EmbeddingTable& table,
                   std::vector<std::string> class_names, int emotion_dim) {
    config.validate();
    if (class_names.size() < 2) throw ConfigError("EinModel needs at least two classes");
    if (config.output_mode == OutputMode::sigmoid_binary && class_names.size() != 2)
        throw ConfigError("sigmoid_binary requires exactly two classes");
    if (config.dense_a_units > 0 && emotion_dim < 1)
        throw ConfigError("emotional branch enabled but emotion dimension is 0");
    config_ = config;
    class_names_ = std::move(class_names);
    emotion_dim_ = emotion_dim;
    embed_dim_ = static_cast<int>(table.dimension());
    vocab_ = table.words();
    rebuild_vocab_index();

    const int d = embed_dim_;
    const int u = config_.lstm_units;
    const int da = config_.dense_a_units;
    const int db = config_.dense_b_units;
    const int concat = u + da;
    const int c =
        config_.output_mode == OutputMode::sigmoid_binary ? 1 : static_cast<int>(class_names_.size());

    std::mt19937_64 rng(config_.seed);
    auto glorot = [&rng](int rows, int cols, int fan_in, int fan_out) {
        double limit = std::sqrt(6.0 / double(fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-limit, limit);
        Eigen::MatrixXd m(rows, cols);
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = dist(rng);
        return m;
    };

    embedding.resize(static_cast<Eigen::Index>(vocab_.size()), d);
    for (std::size_t i = 0; i < vocab_.size(); ++i)
        embedding.row(static_cast<Eigen::Index>(i)) = table.vector_at(static_cast<int>(i));
    oov = glorot(1, d, d, d) * 0.1;

    lstm_wx = glorot(4 * u, d, d, u);
    lstm_wh = glorot(4 * u, u, u, u);
    lstm_b = Eigen::MatrixXd::Zero(4 * u, 1);
    lstm_b.block(u, 0, u, 1).setConstant(1.0);  // forget gate bias

    att_w = glorot(u, 1, u, 1);
    att_b = Eigen::MatrixXd::Zero(1, 1);
    dense_a_w = glorot(da, emotion_dim_, emotion_dim_, da);
    dense_a_b = Eigen::MatrixXd::Zero(da, 1);
    dense_b_w = glorot(db, concat, concat, db);
    dense_b_b = Eigen::MatrixXd::Zero(db, 1);
    out_w = glorot(c, db, db, c);
    out_b = Eigen::MatrixXd::Zero(c, 1);
}

void EinModel::rebuild_vocab_index() {
    vocab_index_.clear();
    for (std::size_t i = 0; i < vocab_.size(); ++i) vocab_index_[vocab_[i]] = static_cast<int>(i);
}

void EinModel::set_metadata(EinConfig config, std::vector<std::string> vocab,
                            std::vector<std::string> class_names, int emotion_dim, int embed_dim) {
    config_ = std::move(config);
    vocab_ = std::move(vocab);
    class_names_ = std::move(class_names);
    emotion_dim_ = emotion_dim;
    embed_dim_ = embed_dim;
    rebuild_vocab_index();
}

std::vector<int> EinModel::token_ids(const std::vector<std::string>& tokens) const {
    std::vector<int> ids;
    for (const auto& t : tokens) {
        if (config_.remove_stop_words && stop_words().count(t)) continue;
        if (static_cast<int>(ids.size()) >= config_.max_sequence) break;
        auto it = vocab_index_.find(t);
        ids.push_back(it == vocab_index_.end() ? -1 : it->second);
    }
    if (ids.empty()) ids.push_back(-1);
    return ids;
}

std::vector<std::pair<std::string, Eigen::MatrixXd*>> EinModel::parameters() {
    std::vector<std::pair<std::string, Eigen::MatrixXd*>> out;
    if (config_.trainable_embeddings) out.emplace_back("embedding", &embedding);
    out.emplace_back("oov", &oov);
    out.emplace_back("lstm_wx", &lstm_wx);
    out.emplace_back("lstm_wh", &lstm_wh);
    out.emplace_back("lstm_b", &lstm_b);
    out.emplace_back("att_w", &att_w);
    out.emplace_back("att_b", &att_b);
    if (config_.dense_a_units > 0) {
        out.emplace_back("dense_a_w", &dense_a_w);
        out.emplace_back("dense_a_b", &dense_a_b);
    }
    out.emplace_back("dense_b_w", &dense_b_w);
    out.emplace_back("dense_b_b", &dense_b_b);
    out.emplace_back("out_w", &out_w);
    out.emplace_back("out_b", &out_b);
    return out;
}

std::vector<std::pair<std::string, const Eigen::MatrixXd*>> EinModel::parameters() const {
    auto mut = const_cast<EinModel*>(this)->parameters();
    std::vector<std::pair<std::string, const Eigen::MatrixXd*>> out;
    for (auto& [name, p] : mut) out.emplace_back(name, p);
    return out;
}

Eigen::MatrixXd lstm_forward(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& wx,
                             const Eigen::MatrixXd& wh, const Eigen::MatrixXd& b) {
    const Eigen::Index n = inputs.rows();
    const Eigen::Index u = wh.cols();
    Eigen::MatrixXd hidden(n, u);
    Eigen::VectorXd h = Eigen::VectorXd::Zero(u), c = Eigen::VectorXd::Zero(u);
    for (Eigen::Index t = 0; t < n; ++t) {
        Eigen::VectorXd pre = wx * inputs.row(t).transpose() + wh * h + b.col(0);
        Eigen::ArrayXd i = pre.segment(0, u).array().unaryExpr([](double x) { return sigmoid(x); });
        Eigen::ArrayXd f = pre.segment(u, u).array().unaryExpr([](double x) { return sigmoid(x); });
        Eigen::ArrayXd o =
            pre.segment(2 * u, u).array().unaryExpr([](double x) { return sigmoid(x); });
        Eigen::ArrayXd g = pre.segment(3 * u, u).array().tanh();
        c = (f * c.array() + i * g).matrix();
        h = (o * c.array().tanh()).matrix();
        hidden.row(t) = h.transpose();
    }
    return hidden;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> attention(const Eigen::MatrixXd& hidden,
                                                      const Eigen::VectorXd& w, double b) {
    Eigen::VectorXd scores = ((hidden * w).array() + b).tanh();
    Eigen::VectorXd alpha = softmax(scores);
    Eigen::VectorXd context = hidden.transpose() * alpha;
    return {alpha, context};
}

double loss(const Eigen::VectorXd& pred, int target, OutputMode mode) {
    if (mode == OutputMode::softmax_multiclass) {
        double p = std::clamp(pred[target], kProbEps, 1.0 - kProbEps);
        return -std::log(p);
    }
    double p = std::clamp(pred[0], kProbEps, 1.0 - kProbEps);
    return target == 1 ? -std::log(p) : -std::log(1.0 - p);
}

namespace {

// Full per-document forward pass with everything backward needs.
struct Cache {
    std::vector<int> ids;
    Eigen::MatrixXd x;                      // n x d
    Eigen::MatrixXd ig, fg, og, gg, cs, hs;  // n x u each
    Eigen::VectorXd scores, alpha;          // n
    Eigen::VectorXd context;                // u
    Eigen::VectorXd mask_d;                 // u (inverted-dropout scale)
    Eigen::VectorXd context_dropped;        // u
    Eigen::VectorXd a_pre, a_act, mask_c, a_dropped;  // da
    Eigen::VectorXd z;                      // u + da
    Eigen::VectorXd hb_pre, hb;             // db
    Eigen::VectorXd logits, probs;
};

Cache run_forward(const EinModel& m, const std::vector<std::string>& tokens,
                  const Eigen::VectorXd& emo, bool training, std::mt19937_64* rng) {
    const auto& cfg = m.config();
    const int u = cfg.lstm_units;
    const int da = cfg.dense_a_units;

    Cache c;
    c.ids = m.token_ids(tokens);
    const auto n = static_cast<Eigen::Index>(c.ids.size());
    c.x.resize(n, m.embed_dim());
    for (Eigen::Index t = 0; t < n; ++t)
        c.x.row(t) = c.ids[t] < 0 ? m.oov.row(0) : m.embedding.row(c.ids[t]);

    c.ig.resize(n, u);
    c.fg.resize(n, u);
    c.og.resize(n, u);
    c.gg.resize(n, u);
    c.cs.resize(n, u);
    c.hs.resize(n, u);
    Eigen::VectorXd h = Eigen::VectorXd::Zero(u), cell = Eigen::VectorXd::Zero(u);
    for (Eigen::Index t = 0; t < n; ++t) {
        Eigen::VectorXd pre = m.lstm_wx * c.x.row(t).transpose() + m.lstm_wh * h + m.lstm_b.col(0);
        Eigen::ArrayXd gi = pre.segment(0, u).array().unaryExpr([](double v) { return sigmoid(v); });
        Eigen::ArrayXd gf = pre.segment(u, u).array().unaryExpr([](double v) { return sigmoid(v); });
        Eigen::ArrayXd go =
            pre.segment(2 * u, u).array().unaryExpr([](double v) { return sigmoid(v); });
        Eigen::ArrayXd gg = pre.segment(3 * u, u).array().tanh();
        cell = (gf * cell.array() + gi * gg).matrix();
        h = (go * cell.array().tanh()).matrix();
        c.ig.row(t) = gi.transpose();
        c.fg.row(t) = gf.transpose();
        c.og.row(t) = go.transpose();
        c.gg.row(t) = gg.transpose();
        c.cs.row(t) = cell.transpose();
        c.hs.row(t) = h.transpose();
    }

    c.scores = ((c.hs * m.att_w.col(0)).array() + m.att_b(0, 0)).tanh();
    c.alpha = softmax(c.scores);
    c.context = c.hs.transpose() * c.alpha;

    auto dropout_mask = [&](int size, double p) {
        Eigen::VectorXd mask = Eigen::VectorXd::Ones(size);
        if (training && rng && p > 0.0) {
            std::uniform_real_distribution<double> dist(0.0, 1.0);
            for (int i = 0; i < size; ++i) mask[i] = dist(*rng) < p ? 0.0 : 1.0 / (1.0 - p);
        }
        return mask;
    };
    c.mask_d = dropout_mask(u, cfg.drop_d);
    c.context_dropped = c.context.cwiseProduct(c.mask_d);

    if (da > 0) {
        c.a_pre = m.dense_a_w * emo + m.dense_a_b.col(0);
        c.a_act = apply_activation(c.a_pre, cfg.hidden_activation);
        c.mask_c = dropout_mask(da, cfg.drop_c);
        c.a_dropped = c.a_act.cwiseProduct(c.mask_c);
        c.z.resize(u + da);
        c.z << c.context_dropped, c.a_dropped;
    } else {
        c.z = c.context_dropped;
    }

    c.hb_pre = m.dense_b_w * c.z + m.dense_b_b.col(0);
    c.hb = apply_activation(c.hb_pre, cfg.hidden_activation);
    c.logits = m.out_w * c.hb + m.out_b.col(0);
    if (cfg.output_mode == OutputMode::softmax_multiclass) {
        c.probs = softmax(c.logits);
    } else {
        c.probs.resize(1);
        c.probs[0] = sigmoid(c.logits[0]);
    }
    return c;
}

}  // namespace

Eigen::VectorXd EinModel::forward(const std::vector<std::string>& tokens,
                                  const Eigen::VectorXd& emo, bool training,
                                  std::mt19937_64* rng) const {
    if (config_.dense_a_units > 0 && emo.size() != emotion_dim_)
        throw ConfigError("emotion vector length " + std::to_string(emo.size()) +
                          " does not match model emotion dimension " +
                          std::to_string(emotion_dim_));
    return run_forward(*this, tokens, emo, training, rng).probs;
}

EinModel::Introspection EinModel::introspect(const std::vector<std::string>& tokens,
                                             const Eigen::VectorXd& emo) const {
    Cache c = run_forward(*this, tokens, emo, false, nullptr);
    return {c.alpha, c.context, c.hb, c.probs};
}

std::pair<std::string, Eigen::VectorXd> EinModel::predict(
    const Document& doc, const std::vector<Lexicon>& lexicons) const {
    Eigen::VectorXd emo = config_.dense_a_units > 0
                              ? emotion_features(doc, lexicons).values
                              : Eigen::VectorXd::Zero(emotion_dim_);
    Eigen::VectorXd out = forward(doc.tokens, emo);
    if (config_.output_mode == OutputMode::sigmoid_binary)
        return {out[0] >= 0.5 ? class_names_[1] : class_names_[0], out};
    Eigen::Index best;
    out.maxCoeff(&best);
    return {class_names_[static_cast<std::size_t>(best)], out};
}

std::vector<TrainExample> make_examples(const Corpus& corpus, const std::vector<Lexicon>& lexicons,
                                        const std::vector<std::string>& class_names,
                                        OutputMode mode) {
    std::vector<TrainExample> out;
    for (const auto& doc : corpus.documents) {
        TrainExample ex;
        ex.tokens = doc.tokens;
        ex.emotion = emotion_features(doc, lexicons).values;
        auto it = std::find(class_names.begin(), class_names.end(), doc.label);
        if (it == class_names.end())
            throw ValidationError("document label '" + doc.label + "' not in the class set");
        auto idx = static_cast<int>(it - class_names.begin());
        ex.target = mode == OutputMode::sigmoid_binary ? (idx == 1 ? 1 : 0) : idx;
        out.push_back(std::move(ex));
    }
    return out;
}

EinTrainer::EinTrainer(EinModel& model) : model_(model), params_(model.parameters()) {
    zero_grads();
}

void EinTrainer::zero_grads() {
    grads_.clear();
    for (auto& [name, p] : params_) grads_.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
}

double EinTrainer::example_loss_and_grad(const TrainExample& ex, bool with_grad,
                                         std::mt19937_64* dropout_rng) {
    const auto& cfg = model_.config();
    const int u = cfg.lstm_units;
    const int da = cfg.dense_a_units;

    Cache c = run_forward(model_, ex.tokens, ex.emotion, dropout_rng != nullptr, dropout_rng);
    double l = loss(c.probs, ex.target, cfg.output_mode);
    if (!with_grad) return l;

    // Named gradient slots, resolved once.
    auto grad_of = [&](const char* name) -> Eigen::MatrixXd* {
        for (std::size_t i = 0; i < params_.size(); ++i)
            if (params_[i].first == name) return &grads_[i];
        return nullptr;
    };

    Eigen::VectorXd dlogits;
    if (cfg.output_mode == OutputMode::softmax_multiclass) {
        dlogits = c.probs;
        dlogits[ex.target] -= 1.0;
    } else {
        dlogits.resize(1);
        dlogits[0] = c.probs[0] - double(ex.target);
    }

    *grad_of("out_w") += dlogits * c.hb.transpose();
    grad_of("out_b")->col(0) += dlogits;

    Eigen::VectorXd dhb = model_.out_w.transpose() * dlogits;
    dhb = dhb.cwiseProduct(activation_grad(c.hb_pre, c.hb, cfg.hidden_activation));
    *grad_of("dense_b_w") += dhb * c.z.transpose();
    grad_of("dense_b_b")->col(0) += dhb;

    Eigen::VectorXd dz = model_.dense_b_w.transpose() * dhb;
    Eigen::VectorXd dcontext = dz.head(u).cwiseProduct(c.mask_d);
    if (da > 0) {
        Eigen::VectorXd da_act = dz.tail(da).cwiseProduct(c.mask_c);
        Eigen::VectorXd da_pre =
            da_act.cwiseProduct(activation_grad(c.a_pre, c.a_act, cfg.hidden_activation));
        *grad_of("dense_a_w") += da_pre * ex.emotion.transpose();
        grad_of("dense_a_b")->col(0) += da_pre;
    }

    // Attention backward: context = H^T alpha, alpha = softmax(tanh(H w + b)).
    const auto n = static_cast<Eigen::Index>(c.ids.size());
    Eigen::VectorXd dalpha = c.hs * dcontext;                        // n
    Eigen::MatrixXd dh = c.alpha * dcontext.transpose();             // n x u
    double inner = c.alpha.dot(dalpha);
    Eigen::VectorXd dscores = c.alpha.cwiseProduct(dalpha.array().matrix() -
                                                   Eigen::VectorXd::Constant(n, inner));
    Eigen::VectorXd dpre_s = dscores.cwiseProduct((1.0 - c.scores.array().square()).matrix());
    *grad_of("att_w") += c.hs.transpose() * dpre_s;
    (*grad_of("att_b"))(0, 0) += dpre_s.sum();
    dh += dpre_s * model_.att_w.col(0).transpose();

    // LSTM backward through time.
    Eigen::MatrixXd* g_wx = grad_of("lstm_wx");
    Eigen::MatrixXd* g_wh = grad_of("lstm_wh");
    Eigen::MatrixXd* g_b = grad_of("lstm_b");
    Eigen::MatrixXd* g_emb = grad_of("embedding");  // null when embeddings frozen
    Eigen::MatrixXd* g_oov = grad_of("oov");

    Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(u);
    Eigen::VectorXd dc_next = Eigen::VectorXd::Zero(u);
    for (Eigen::Index t = n - 1; t >= 0; --t) {
        Eigen::ArrayXd gi = c.ig.row(t).transpose().array();
        Eigen::ArrayXd gf = c.fg.row(t).transpose().array();
        Eigen::ArrayXd go = c.og.row(t).transpose().array();
        Eigen::ArrayXd gg = c.gg.row(t).transpose().array();
        Eigen::ArrayXd cell = c.cs.row(t).transpose().array();
        Eigen::ArrayXd cell_prev =
            t > 0 ? Eigen::ArrayXd(c.cs.row(t - 1).transpose().array()) : Eigen::ArrayXd::Zero(u);
        Eigen::ArrayXd tanh_c = cell.tanh();

        Eigen::ArrayXd dht = dh.row(t).transpose().array() + dh_next.array();
        Eigen::ArrayXd dct = dc_next.array() + dht * go * (1.0 - tanh_c.square());

        Eigen::ArrayXd d_go = dht * tanh_c * go * (1.0 - go);
        Eigen::ArrayXd d_gf = dct * cell_prev * gf * (1.0 - gf);
        Eigen::ArrayXd d_gi = dct * gg * gi * (1.0 - gi);
        Eigen::ArrayXd d_gg = dct * gi * (1.0 - gg.square());

        Eigen::VectorXd dpre(4 * u);
        dpre << d_gi.matrix(), d_gf.matrix(), d_go.matrix(), d_gg.matrix();

        Eigen::VectorXd h_prev =
            t > 0 ? Eigen::VectorXd(c.hs.row(t - 1).transpose()) : Eigen::VectorXd::Zero(u);
        *g_wx += dpre * c.x.row(t);
        *g_wh += dpre * h_prev.transpose();
        g_b->col(0) += dpre;

        Eigen::VectorXd dx = model_.lstm_wx.transpose() * dpre;
        if (c.ids[t] < 0) {
            g_oov->row(0) += dx.transpose();
        } else if (g_emb) {
            g_emb->row(c.ids[t]) += dx.transpose();
        }

        dh_next = model_.lstm_wh.transpose() * dpre;
        dc_next = (dct * gf).matrix();
    }
    return l;
}

double EinTrainer::batch_loss_and_grad(const std::vector<const TrainExample*>& batch,
                                       bool with_grad, std::mt19937_64* dropout_rng) {
    if (batch.empty()) throw ConfigError("empty batch");
    double total = 0.0;
    for (const TrainExample* ex : batch) total += example_loss_and_grad(*ex, with_grad, dropout_rng);
    double mean = total / double(batch.size());
    if (with_grad)
        for (auto& g : grads_) g /= double(batch.size());
    return mean;
}

double EinTrainer::gradient_check(const std::vector<const TrainExample*>& batch, double epsilon) {
    zero_grads();
    double base = batch_loss_and_grad(batch, true, nullptr);
    if (!std::isfinite(base)) throw NumericError("gradient_check: non-finite loss");

    double max_rel = 0.0;
    for (std::size_t p = 0; p < params_.size(); ++p) {
        Eigen::MatrixXd& theta = *params_[p].second;
        for (Eigen::Index i = 0; i < theta.size(); ++i) {
            double orig = theta(i);
            double analytic = grads_[p](i);
            auto rel_at = [&](double step) {
                theta(i) = orig + step;
                double lp = batch_loss_and_grad(batch, false, nullptr);
                theta(i) = orig - step;
                double lm = batch_loss_and_grad(batch, false, nullptr);
                theta(i) = orig;
                double numeric = (lp - lm) / (2.0 * step);
                double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
                return std::abs(analytic - numeric) / denom;
            };
            double rel = rel_at(epsilon);
            // Near-zero gradients drown in round-off at the base step; a larger
            // step shrinks the cancellation noise. Take the best step per
            // parameter: a wrong analytic gradient stays wrong at every step.
            if (rel > 1e-6) rel = std::min(rel, rel_at(10.0 * epsilon));
            if (rel > 1e-6) rel = std::min(rel, rel_at(100.0 * epsilon));
            max_rel = std::max(max_rel, rel);
        }
    }
    return max_rel;
}

TrainHistory EinTrainer::train(const std::vector<TrainExample>& train_set,
                               const std::vector<TrainExample>& val_set) {
    const auto& cfg = model_.config();
    if (train_set.empty() || val_set.empty())
        throw ConfigError("train requires non-empty train and validation sets");

    Optimizer opt(cfg.optimizer, cfg.learning_rate);
    std::mt19937_64 shuffle_rng(cfg.seed);
    std::mt19937_64 dropout_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);

    TrainHistory history;
    std::vector<Eigen::MatrixXd> best_params;
    double best_val = std::numeric_limits<double>::infinity();
    int since_best = 0;

    auto snapshot = [&]() {
        best_params.clear();
        for (auto& [name, p] : params_) best_params.push_back(*p);
    };
    snapshot();

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);

    auto validate = [&]() {
        double vloss = 0.0;
        std::vector<std::string> pred, gold;
        const auto& names = model_.class_names();
        for (const auto& ex : val_set) {
            Eigen::VectorXd out = model_.forward(ex.tokens, ex.emotion);
            vloss += loss(out, ex.target, cfg.output_mode);
            if (cfg.output_mode == OutputMode::sigmoid_binary) {
                pred.push_back(out[0] >= 0.5 ? names[1] : names[0]);
                gold.push_back(names[ex.target]);
            } else {
                Eigen::Index best;
                out.maxCoeff(&best);
                pred.push_back(names[static_cast<std::size_t>(best)]);
                gold.push_back(names[ex.target]);
            }
        }
        MetricsReport rep = compute_metrics(pred, gold, {names.begin(), names.end()});
        return std::make_pair(vloss / double(val_set.size()), rep.macro_f1);
    };

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            std::vector<const TrainExample*> batch;
            for (std::size_t i = start; i < std::min(order.size(), start + cfg.batch_size); ++i)
                batch.push_back(&train_set[order[i]]);
            zero_grads();
            double l = batch_loss_and_grad(batch, true, &dropout_rng);
            if (!std::isfinite(l))
                throw NumericError("non-finite training loss at epoch " + std::to_string(epoch) +
                                   ", batch " + std::to_string(batches));
            opt.step(params_, grads_);
            epoch_loss += l;
            ++batches;
        }
        auto [vloss, vf1] = validate();
        history.train_loss.push_back(epoch_loss / double(batches));
        history.val_loss.push_back(vloss);
        history.val_macro_f1.push_back(vf1);
        history.stopped_epoch = epoch;

        if (vloss < best_val) {
            best_val = vloss;
            history.best_epoch = epoch;
            since_best = 0;
            snapshot();
        } else {
            ++since_best;
            if (since_best > cfg.early_stop_patience) break;
        }
    }

    for (std::size_t i = 0; i < params_.size(); ++i) *params_[i].second = best_params[i];
    return history;
}

Optimizer::Optimizer(OptimizerKind kind, double learning_rate) : kind_(kind), lr_(learning_rate) {
    if (lr_ <= 0.0) {
        switch (kind_) {
            case OptimizerKind::adam: lr_ = 1e-3; break;
            case OptimizerKind::rmsprop: lr_ = 1e-3; break;
            case OptimizerKind::adadelta: lr_ = 1.0; break;
        }
    }
}

void Optimizer::step(std::vector<std::pair<std::string, Eigen::MatrixXd*>>& params,
                     const std::vector<Eigen::MatrixXd>& grads) {
    if (m_.empty()) {
        for (auto& [name, p] : params) {
            m_.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
            v_.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
        }
    }
    ++t_;
    for (std::size_t i = 0; i < params.size(); ++i) {
        Eigen::MatrixXd& theta = *params[i].second;
        const Eigen::MatrixXd& g = grads[i];
        switch (kind_) {
            case OptimizerKind::adam: {
                const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
                m_[i] = b1 * m_[i] + (1 - b1) * g;
                v_[i] = b2 * v_[i].array().matrix() + (1 - b2) * g.cwiseProduct(g);
                double c1 = 1.0 - std::pow(b1, double(t_));
                double c2 = 1.0 - std::pow(b2, double(t_));
                theta.array() -=
                    lr_ * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps);
                break;
            }
            case OptimizerKind::rmsprop: {
                const double rho = 0.9, eps = 1e-8;
                v_[i] = rho * v_[i] + (1 - rho) * g.cwiseProduct(g);
                theta.array() -= lr_ * g.array() / (v_[i].array().sqrt() + eps);
                break;
            }
            case OptimizerKind::adadelta: {
                const double rho = 0.95, eps = 1e-6;
                v_[i] = rho * v_[i] + (1 - rho) * g.cwiseProduct(g);
                Eigen::ArrayXXd delta = -((m_[i].array() + eps).sqrt() /
                                          (v_[i].array() + eps).sqrt()) *
                                        g.array();
                theta.array() += lr_ * delta;
                m_[i] = rho * m_[i].array().matrix() + (1 - rho) * (delta * delta).matrix();
                break;
            }
        }
    }
}


std::string TrainHistory::to_json() const {
    nlohmann::json j{{"train_loss", train_loss},
                     {"val_loss", val_loss},
                     {"val_macro_f1", val_macro_f1},
                     {"stopped_epoch", stopped_epoch},
                     {"best_epoch", best_epoch}};
    return j.dump(2);
}

}  // namespace ein
