#include <doctest.h>

#include <cmath>

#include "ein/analysis.hpp"
#include "ein/errors.hpp"
#include "ein/neural.hpp"
#include "fixtures.hpp"

using namespace ein;

namespace {

EinConfig tiny_config() {
    EinConfig cfg;
    cfg.lstm_units = 4;
    cfg.dense_a_units = 3;
    cfg.dense_b_units = 4;
    cfg.batch_size = 4;
    cfg.max_sequence = 20;
    cfg.seed = 9;
    cfg.max_epochs = 5;
    return cfg;
}

std::pair<EinModel, std::vector<TrainExample>> tiny_model_and_examples(std::uint64_t seed) {
    Corpus corpus = fixtures::emotion_corpus(10, seed, false);
    auto lexicons = fixtures::tiny_lexicons();
    EmbeddingTable table = fixtures::random_table_for(corpus, 6, seed + 1);
    std::vector<std::string> classes(corpus.labels.begin(), corpus.labels.end());
    EinConfig cfg = tiny_config();
    cfg.seed = seed;
    EinModel model(cfg, table, classes,
                   static_cast<int>(feature_dimension(lexicons)));
    auto examples = make_examples(corpus, lexicons, classes, cfg.output_mode);
    return {std::move(model), std::move(examples)};
}

}  // namespace

TEST_SUITE("neural") {

TEST_CASE("token ids: lookup, OOV, stop-word removal, truncation") {
    EmbeddingTable table(4);
    table.add("alpha", Eigen::Vector4d(1, 2, 3, 4));
    table.add("beta", Eigen::Vector4d(5, 6, 7, 8));
    table.add("gamma", Eigen::Vector4d(9, 10, 11, 12));
    EinConfig cfg = tiny_config();
    cfg.dense_a_units = 0;
    cfg.max_sequence = 3;
    EinModel model(cfg, table, {"x", "y"}, 0);

    auto ids = model.token_ids({"alpha", "beta", "gamma"});
    REQUIRE(ids.size() == 3);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        REQUIRE(ids[i] >= 0);
        CHECK((model.embedding.row(ids[i]).transpose() -
               table.vector_at(static_cast<int>(i))).norm() == 0.0);
    }

    CHECK(model.token_ids({"alpha", "zzz"}) == std::vector<int>{0, -1});
    CHECK(model.token_ids({"the", "alpha", "and"}) == std::vector<int>{0});
    CHECK(model.token_ids({"the", "and"}) == std::vector<int>{-1});
    CHECK(model.token_ids({"alpha", "beta", "gamma", "alpha", "beta"}).size() == 3);
}

TEST_CASE("lstm_forward: zero case and single step") {
    Eigen::MatrixXd wx = Eigen::MatrixXd::Zero(8, 3);
    Eigen::MatrixXd wh = Eigen::MatrixXd::Zero(8, 2);
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(8, 1);
    Eigen::MatrixXd inputs = Eigen::MatrixXd::Zero(4, 3);
    Eigen::MatrixXd h = lstm_forward(inputs, wx, wh, b);
    CHECK(h.rows() == 4);
    CHECK(h.cols() == 2);
    CHECK(h.norm() == 0.0);

    // one timestep equals one cell application from the zero state
    Eigen::MatrixXd wx1 = Eigen::MatrixXd::Random(8, 3);
    Eigen::MatrixXd wh1 = Eigen::MatrixXd::Random(8, 2);
    Eigen::MatrixXd b1 = Eigen::MatrixXd::Random(8, 1);
    Eigen::MatrixXd x1 = Eigen::MatrixXd::Random(1, 3);
    Eigen::MatrixXd h1 = lstm_forward(x1, wx1, wh1, b1);
    Eigen::VectorXd pre = wx1 * x1.row(0).transpose() + b1.col(0);
    auto sg = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
    for (int j = 0; j < 2; ++j) {
        double i_g = sg(pre[j]);
        double o_g = sg(pre[4 + j]);
        double g_g = std::tanh(pre[6 + j]);
        CHECK(h1(0, j) == doctest::Approx(o_g * std::tanh(i_g * g_g)).epsilon(1e-12));
    }
}

TEST_CASE("lstm_forward: scalar two-step fixture") {
    // u=1, d=1, gate rows in [i; f; o; g] order
    Eigen::MatrixXd wx(4, 1), wh(4, 1), b(4, 1);
    wx << 0.5, -0.3, 0.8, 1.0;
    wh << 0.2, 0.4, -0.5, 0.3;
    b << 0.1, 1.0, -0.2, 0.0;
    Eigen::MatrixXd inputs(2, 1);
    inputs << 0.7, -1.2;
    Eigen::MatrixXd h = lstm_forward(inputs, wx, wh, b);
    CHECK(h(0, 0) == doctest::Approx(0.2080261499007).epsilon(1e-10));
    CHECK(h(1, 0) == doctest::Approx(-0.00366037881429094).epsilon(1e-10));
}

TEST_CASE("attention: degenerate and uniform cases") {
    Eigen::MatrixXd h1(1, 3);
    h1 << 0.4, -0.2, 0.9;
    Eigen::VectorXd w = Eigen::Vector3d(0.1, 0.2, 0.3);
    auto [alpha1, ctx1] = attention(h1, w, 0.5);
    REQUIRE(alpha1.size() == 1);
    CHECK(alpha1[0] == doctest::Approx(1.0));
    CHECK((ctx1 - h1.row(0).transpose()).norm() == doctest::Approx(0.0));

    Eigen::MatrixXd same(4, 3);
    for (int i = 0; i < 4; ++i) same.row(i) << 0.4, -0.2, 0.9;
    auto [alpha4, ctx4] = attention(same, w, 0.5);
    for (int i = 0; i < 4; ++i) CHECK(alpha4[i] == doctest::Approx(0.25));
    CHECK(alpha4.sum() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("attention: two-state fixture") {
    Eigen::MatrixXd h(2, 2);
    h << 0.5, -0.2, 0.1, 0.9;
    Eigen::VectorXd w(2);
    w << 0.3, -0.7;
    auto [alpha, ctx] = attention(h, w, 0.2);
    CHECK(alpha[0] == doctest::Approx(0.69723496).epsilon(1e-7));
    CHECK(alpha[1] == doctest::Approx(0.30276504).epsilon(1e-7));
    CHECK(ctx[0] == doctest::Approx(0.37889398).epsilon(1e-7));
    CHECK(ctx[1] == doctest::Approx(0.13304154).epsilon(1e-7));
}

TEST_CASE("forward: softmax normalization, determinism, LSTM-only branch") {
    auto [model, examples] = tiny_model_and_examples(21);
    const auto& ex = examples[0];
    Eigen::VectorXd out1 = model.forward(ex.tokens, ex.emotion);
    Eigen::VectorXd out2 = model.forward(ex.tokens, ex.emotion);
    CHECK(out1.sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK((out1 - out2).norm() == 0.0);

    // dense_a_units = 0: the emotion vector must not influence the output
    Corpus corpus = fixtures::emotion_corpus(10, 21, false);
    EmbeddingTable table = fixtures::random_table_for(corpus, 6, 22);
    std::vector<std::string> classes(corpus.labels.begin(), corpus.labels.end());
    EinConfig cfg = tiny_config();
    cfg.dense_a_units = 0;
    EinModel lstm_only(cfg, table, classes, 38);
    Eigen::VectorXd emo_a = Eigen::VectorXd::Zero(38);
    Eigen::VectorXd emo_b = Eigen::VectorXd::Constant(38, 0.7);
    Eigen::VectorXd a = lstm_only.forward(corpus.documents[0].tokens, emo_a);
    Eigen::VectorXd b = lstm_only.forward(corpus.documents[0].tokens, emo_b);
    CHECK((a - b).norm() == 0.0);
}

TEST_CASE("loss fixtures") {
    Eigen::VectorXd onehot = Eigen::VectorXd::Zero(5);
    onehot[2] = 1.0;
    CHECK(loss(onehot, 2, OutputMode::softmax_multiclass) < 1e-6);

    Eigen::VectorXd uniform = Eigen::VectorXd::Constant(5, 0.2);
    CHECK(loss(uniform, 0, OutputMode::softmax_multiclass) ==
          doctest::Approx(std::log(5.0)).epsilon(1e-9));

    Eigen::VectorXd binary(1);
    binary << 0.8;
    CHECK(loss(binary, 1, OutputMode::sigmoid_binary) ==
          doctest::Approx(-std::log(0.8)).epsilon(1e-9));
    CHECK(loss(binary, 0, OutputMode::sigmoid_binary) ==
          doctest::Approx(-std::log(0.2)).epsilon(1e-9));
}

TEST_CASE("gradient check on the tiny model") {
    for (std::uint64_t seed : {101ull, 202ull, 303ull}) {
        auto [model, examples] = tiny_model_and_examples(seed);
        EinTrainer trainer(model);
        std::vector<const TrainExample*> batch;
        for (std::size_t i = 0; i < 4; ++i) batch.push_back(&examples[i]);
        // step balances truncation against cancellation noise on small gradients
        double err = trainer.gradient_check(batch, 1e-5);
        CHECK(err < 1e-4);
    }
}

TEST_CASE("zero weights and zero inputs give zero attention-score gradients") {
    auto [model, examples] = tiny_model_and_examples(404);
    for (auto& [name, p] : model.parameters()) p->setZero();
    model.oov.setZero();
    model.embedding.setZero();

    EinTrainer trainer(model);
    std::vector<const TrainExample*> batch = {&examples[0]};
    trainer.zero_grads();
    trainer.batch_loss_and_grad(batch, true, nullptr);
    auto params = model.parameters();
    bool found = false;
    for (std::size_t i = 0; i < params.size(); ++i)
        if (params[i].first == "att_w") {
            CHECK(trainer.grads()[i].norm() == 0.0);
            found = true;
        }
    CHECK(found);
}

TEST_CASE("optimizer: zero gradient leaves parameters unchanged") {
    for (auto kind : {OptimizerKind::adam, OptimizerKind::rmsprop, OptimizerKind::adadelta}) {
        Eigen::MatrixXd theta = Eigen::MatrixXd::Constant(2, 2, 0.5);
        std::vector<std::pair<std::string, Eigen::MatrixXd*>> params{{"w", &theta}};
        std::vector<Eigen::MatrixXd> grads{Eigen::MatrixXd::Zero(2, 2)};
        Optimizer opt(kind, 0.0);
        for (int i = 0; i < 3; ++i) opt.step(params, grads);
        CHECK((theta.array() - 0.5).matrix().norm() == 0.0);
    }
}

TEST_CASE("optimizer: adam single step moves by about the learning rate") {
    Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(1, 1);
    std::vector<std::pair<std::string, Eigen::MatrixXd*>> params{{"w", &theta}};
    std::vector<Eigen::MatrixXd> grads{Eigen::MatrixXd::Constant(1, 1, 1.0)};
    Optimizer opt(OptimizerKind::adam, 0.0);
    opt.step(params, grads);
    CHECK(theta(0, 0) == doctest::Approx(-1e-3).epsilon(1e-4));
}

TEST_CASE("optimizer: rmsprop step magnitude approaches lr under a constant gradient") {
    Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(1, 1);
    std::vector<std::pair<std::string, Eigen::MatrixXd*>> params{{"w", &theta}};
    std::vector<Eigen::MatrixXd> grads{Eigen::MatrixXd::Constant(1, 1, 1.0)};
    Optimizer opt(OptimizerKind::rmsprop, 0.0);
    double prev = 0.0;
    double delta = 0.0;
    for (int i = 0; i < 300; ++i) {
        opt.step(params, grads);
        delta = prev - theta(0, 0);
        prev = theta(0, 0);
    }
    CHECK(delta == doctest::Approx(1e-3).epsilon(0.01));
}

TEST_CASE("training history is deterministic for a fixed seed") {
    auto run = [] {
        Corpus corpus = fixtures::emotion_corpus(40, 5, false);
        auto lexicons = fixtures::tiny_lexicons();
        EmbeddingTable table = fixtures::random_table_for(corpus, 6, 6);
        std::vector<std::string> classes(corpus.labels.begin(), corpus.labels.end());
        EinConfig cfg = tiny_config();
        cfg.max_epochs = 4;
        EinModel model(cfg, table, classes, 38);
        auto examples = make_examples(corpus, lexicons, classes, cfg.output_mode);
        std::vector<TrainExample> train_set(examples.begin(), examples.begin() + 30);
        std::vector<TrainExample> val_set(examples.begin() + 30, examples.end());
        EinTrainer trainer(model);
        return trainer.train(train_set, val_set).to_json();
    };
    CHECK(run() == run());
}

TEST_CASE("patience 0 stops at the first non-improving epoch") {
    Corpus corpus = fixtures::emotion_corpus(40, 17, false);
    auto lexicons = fixtures::tiny_lexicons();
    EmbeddingTable table = fixtures::random_table_for(corpus, 6, 18);
    std::vector<std::string> classes(corpus.labels.begin(), corpus.labels.end());
    EinConfig cfg = tiny_config();
    cfg.max_epochs = 60;
    cfg.early_stop_patience = 0;
    EinModel model(cfg, table, classes, 38);
    auto examples = make_examples(corpus, lexicons, classes, cfg.output_mode);
    std::vector<TrainExample> train_set(examples.begin(), examples.begin() + 30);
    std::vector<TrainExample> val_set(examples.begin() + 30, examples.end());
    EinTrainer trainer(model);
    TrainHistory h = trainer.train(train_set, val_set);
    REQUIRE(h.stopped_epoch == static_cast<int>(h.val_loss.size()));
    if (h.stopped_epoch < cfg.max_epochs) {
        // every epoch but the last improved on the running best
        double best = h.val_loss[0];
        for (std::size_t i = 1; i + 1 < h.val_loss.size(); ++i) {
            CHECK(h.val_loss[i] < best);
            best = std::min(best, h.val_loss[i]);
        }
        CHECK(h.val_loss.back() >= best);
        CHECK(h.best_epoch == h.stopped_epoch - 1);
    }
}

TEST_CASE("predict: argmax, binary tie-break, repeatability") {
    auto [model, examples] = tiny_model_and_examples(55);
    auto lexicons = fixtures::tiny_lexicons();
    Corpus corpus = fixtures::emotion_corpus(10, 55, false);
    auto p1 = model.predict(corpus.documents[0], lexicons);
    auto p2 = model.predict(corpus.documents[0], lexicons);
    CHECK(p1.first == p2.first);
    Eigen::Index best;
    p1.second.maxCoeff(&best);
    CHECK(p1.first == model.class_names()[static_cast<std::size_t>(best)]);

    // a zeroed binary head scores exactly 0.5; the tie goes to the second class
    Corpus bin = fixtures::clickbait_corpus(10, 55);
    EmbeddingTable table = fixtures::random_table_for(bin, 6, 56);
    std::vector<std::string> classes(bin.labels.begin(), bin.labels.end());
    EinConfig cfg = tiny_config();
    cfg.output_mode = OutputMode::sigmoid_binary;
    EinModel bmodel(cfg, table, classes, 38);
    bmodel.out_w.setZero();
    bmodel.out_b.setZero();
    auto pb = bmodel.predict(bin.documents[0], lexicons);
    CHECK(pb.second[0] == doctest::Approx(0.5));
    CHECK(pb.first == classes[1]);
}

TEST_CASE("checkpoint round trip is bit-exact at 32-bit precision") {
    auto [model, examples] = tiny_model_and_examples(77);
    fixtures::TempDir dir("ckpt");
    std::string path = dir.path() + "/m.ckpt";
    save_checkpoint(model, path);
    EinModel loaded = load_checkpoint(path);

    CHECK(loaded.class_names() == model.class_names());
    CHECK(loaded.vocabulary() == model.vocabulary());
    CHECK(loaded.emotion_dim() == model.emotion_dim());

    auto orig = model.parameters();
    auto back = loaded.parameters();
    REQUIRE(orig.size() == back.size());
    for (std::size_t i = 0; i < orig.size(); ++i) {
        const Eigen::MatrixXd& a = *orig[i].second;
        const Eigen::MatrixXd& b = *back[i].second;
        REQUIRE(a.rows() == b.rows());
        REQUIRE(a.cols() == b.cols());
        for (Eigen::Index r = 0; r < a.rows(); ++r)
            for (Eigen::Index c = 0; c < a.cols(); ++c)
                CHECK(static_cast<float>(a(r, c)) == static_cast<float>(b(r, c)));
    }
}

TEST_CASE("checkpoint: corrupt magic is rejected") {
    fixtures::TempDir dir("ckptbad");
    std::string path = dir.path() + "/bad.ckpt";
    {
        std::ofstream out(path, std::ios::binary);
        out << "NOPE garbage";
    }
    CHECK_THROWS_AS(load_checkpoint(path), ParseError);
}

TEST_CASE("introspection exposes normalized attention and the penultimate width") {
    auto [model, examples] = tiny_model_and_examples(88);
    auto intro = model.introspect(examples[0].tokens, examples[0].emotion);
    CHECK(intro.attention_weights.sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(intro.penultimate.size() == model.config().dense_b_units);
}

}  // TEST_SUITE
