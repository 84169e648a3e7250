#include <benchmark/benchmark.h>

#include <random>

#include "ein/features.hpp"
#include "ein/lexicon.hpp"
#include "ein/neural.hpp"

namespace {

std::vector<ein::Lexicon> make_lexicons() {
    std::vector<ein::Lexicon> out;
    std::mt19937_64 rng(1);
    for (const auto& schema : ein::builtin_schemas()) {
        ein::Lexicon lex(schema);
        std::uniform_int_distribution<std::size_t> pick(0, schema.emotions.size() - 1);
        for (int i = 0; i < 2000; ++i)
            lex.add("word" + std::to_string(i), schema.emotions[pick(rng)]);
        out.push_back(std::move(lex));
    }
    return out;
}

ein::Document make_document(int tokens) {
    ein::Document doc;
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> pick(0, 3999);  // half the ids miss the lexicons
    for (int i = 0; i < tokens; ++i) doc.tokens.push_back("word" + std::to_string(pick(rng)));
    return doc;
}

void bench_emotion_features(benchmark::State& state) {
    auto lexicons = make_lexicons();
    auto doc = make_document(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto v = ein::emotion_features(doc, lexicons);
        benchmark::DoNotOptimize(v.values.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bench_emotion_features)->Arg(50)->Arg(300);

void bench_lstm_forward(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0)), d = 32, u = 32;
    std::mt19937_64 rng(3);
    std::normal_distribution<double> gauss(0.0, 0.1);
    Eigen::MatrixXd inputs(n, d), wx(4 * u, d), wh(4 * u, u), b(4 * u, 1);
    for (auto* m : {&inputs, &wx, &wh, &b})
        for (Eigen::Index i = 0; i < m->rows(); ++i)
            for (Eigen::Index j = 0; j < m->cols(); ++j) (*m)(i, j) = gauss(rng);
    for (auto _ : state) {
        Eigen::MatrixXd h = ein::lstm_forward(inputs, wx, wh, b);
        benchmark::DoNotOptimize(h.data());
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(bench_lstm_forward)->Arg(50)->Arg(300);

void bench_attention(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0)), u = 32;
    Eigen::MatrixXd h = Eigen::MatrixXd::Random(n, u);
    Eigen::VectorXd w = Eigen::VectorXd::Random(u);
    for (auto _ : state) {
        auto [alpha, ctx] = ein::attention(h, w, 0.1);
        benchmark::DoNotOptimize(ctx.data());
    }
}
BENCHMARK(bench_attention)->Arg(50)->Arg(300);

}  // namespace

BENCHMARK_MAIN();
