#include "ein/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "ein/errors.hpp"
#include "ein/features.hpp"

namespace ein {

namespace {

double entropy(const std::map<std::string, std::size_t>& counts, std::size_t total) {
    if (total == 0) return 0.0;
    double h = 0.0;
    for (const auto& [label, c] : counts) {
        if (c == 0) continue;
        double p = double(c) / double(total);
        h -= p * std::log(p);
    }
    return h;
}

// Continued fraction for the incomplete beta function (Lentz's method).
double betacf(double a, double b, double x) {
    const int kMaxIter = 300;
    const double eps = 3e-14, fpmin = 1e-300;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::abs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) break;
    }
    return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double bt = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                         b * std::log(1.0 - x));
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
    return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

FeatureRanking information_gain(const Eigen::MatrixXd& features,
                                const std::vector<std::string>& feature_names,
                                const std::vector<std::string>& labels, int bins) {
    if (bins < 2) throw ConfigError("information_gain requires bins >= 2");
    if (static_cast<std::size_t>(features.rows()) != labels.size())
        throw ValidationError("information_gain: feature rows and labels differ in length");
    if (static_cast<std::size_t>(features.cols()) != feature_names.size())
        throw ValidationError("information_gain: feature columns and names differ in length");
    if (!features.allFinite()) throw ValidationError("information_gain: non-finite feature value");

    const std::size_t n = labels.size();
    std::map<std::string, std::size_t> label_counts;
    for (const auto& l : labels) label_counts[l]++;
    double h_labels = entropy(label_counts, n);

    FeatureRanking ranking;
    for (Eigen::Index f = 0; f < features.cols(); ++f) {
        double lo = features.col(f).minCoeff();
        double hi = features.col(f).maxCoeff();
        double ig = 0.0;
        if (hi > lo) {
            std::vector<std::map<std::string, std::size_t>> bin_counts(bins);
            std::vector<std::size_t> bin_totals(bins, 0);
            for (std::size_t r = 0; r < n; ++r) {
                double v = features(static_cast<Eigen::Index>(r), f);
                int b = std::min(bins - 1, int((v - lo) / (hi - lo) * bins));
                bin_counts[b][labels[r]]++;
                bin_totals[b]++;
            }
            double cond = 0.0;
            for (int b = 0; b < bins; ++b)
                cond += double(bin_totals[b]) / double(n) * entropy(bin_counts[b], bin_totals[b]);
            ig = h_labels - cond;
            if (ig < 0.0 && ig > -1e-15) ig = 0.0;  // rounding guard
        }
        ranking.entries.emplace_back(feature_names[static_cast<std::size_t>(f)], ig);
    }
    std::sort(ranking.entries.begin(), ranking.entries.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return ranking;
}

std::string FeatureRanking::to_json() const {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& [name, score] : entries) j.push_back({{"feature", name}, {"score", score}});
    return j.dump(2);
}

WelchResult welch_t_test(const std::vector<double>& sample_a, const std::vector<double>& sample_b) {
    if (sample_a.size() < 2 || sample_b.size() < 2)
        throw ValidationError("welch_t_test: each sample needs at least 2 observations");
    auto mean_var = [](const std::vector<double>& s) {
        double n = double(s.size());
        double mean = 0.0;
        for (double v : s) mean += v;
        mean /= n;
        double var = 0.0;
        for (double v : s) var += (v - mean) * (v - mean);
        var /= (n - 1.0);
        return std::make_pair(mean, var);
    };
    auto [ma, va] = mean_var(sample_a);
    auto [mb, vb] = mean_var(sample_b);
    double na = double(sample_a.size()), nb = double(sample_b.size());
    double se2 = va / na + vb / nb;

    WelchResult r;
    if (se2 == 0.0) {
        // Degenerate constant samples.
        if (ma == mb) {
            r.t = 0.0;
            r.p = 1.0;
            r.df = na + nb - 2.0;
        } else {
            r.t = ma > mb ? std::numeric_limits<double>::infinity()
                          : -std::numeric_limits<double>::infinity();
            r.p = 0.0;
            r.df = na + nb - 2.0;
        }
    } else {
        r.t = (ma - mb) / std::sqrt(se2);
        r.df = se2 * se2 /
               ((va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0));
        r.p = regularized_incomplete_beta(r.df / 2.0, 0.5, r.df / (r.df + r.t * r.t));
    }
    r.significant_05 = r.p < 0.05;
    r.significant_01 = r.p < 0.01;
    return r;
}

std::map<std::string, std::vector<std::string>> top_n_emotions(
    const std::map<std::string, std::map<std::string, double>>& coefficients, std::size_t n) {
    std::map<std::string, std::vector<std::string>> out;
    for (const auto& [cls, weights] : coefficients) {
        // Collapse "Lexicon:emotion" coordinates to the emotion name (max).
        std::map<std::string, double> by_emotion;
        for (const auto& [name, w] : weights) {
            auto colon = name.find(':');
            std::string emotion = colon == std::string::npos ? name : name.substr(colon + 1);
            auto it = by_emotion.find(emotion);
            if (it == by_emotion.end())
                by_emotion[emotion] = w;
            else
                it->second = std::max(it->second, w);
        }
        if (n > by_emotion.size())
            throw ValidationError("top_n_emotions: n=" + std::to_string(n) + " exceeds the " +
                                  std::to_string(by_emotion.size()) + " available emotions");
        std::vector<std::pair<std::string, double>> sorted(by_emotion.begin(), by_emotion.end());
        std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        std::vector<std::string> top;
        for (std::size_t i = 0; i < n; ++i) top.push_back(sorted[i].first);
        out[cls] = std::move(top);
    }
    return out;
}

PcaResult pca_project(const std::vector<Eigen::VectorXd>& vectors, int k, std::uint64_t seed) {
    if (vectors.size() < static_cast<std::size_t>(k + 1))
        throw ValidationError("pca_project needs at least k+1 vectors");
    const auto n = static_cast<Eigen::Index>(vectors.size());
    const Eigen::Index d = vectors[0].size();
    if (d < k) throw ValidationError("pca_project: dimension below k");

    Eigen::MatrixXd x(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (vectors[static_cast<std::size_t>(i)].size() != d)
            throw ValidationError("pca_project: inconsistent vector dimensions");
        x.row(i) = vectors[static_cast<std::size_t>(i)].transpose();
    }
    Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;

    Eigen::MatrixXd cov = x.transpose() * x / double(n - 1);
    double total_var = cov.trace();
    if (total_var <= 0.0) throw ValidationError("pca_project: zero-variance input");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd components(d, k);
    PcaResult result;
    for (int c = 0; c < k; ++c) {
        Eigen::VectorXd v(d);
        for (Eigen::Index i = 0; i < d; ++i) v[i] = gauss(rng);
        v.normalize();
        for (int iter = 0; iter < 1000; ++iter) {
            Eigen::VectorXd next = cov * v;
            double norm = next.norm();
            if (norm < 1e-300) break;  // remaining variance exhausted
            next /= norm;
            if ((next - v).norm() < 1e-12 || (next + v).norm() < 1e-12) {
                v = next;
                break;
            }
            v = next;
        }
        // Deterministic sign: largest-magnitude coordinate positive.
        Eigen::Index imax;
        v.cwiseAbs().maxCoeff(&imax);
        if (v[imax] < 0.0) v = -v;
        double lambda = v.dot(cov * v);
        components.col(c) = v;
        result.explained_variance.push_back(std::max(0.0, lambda) / total_var);
        cov -= lambda * v * v.transpose();
    }
    result.projected = x * components;
    return result;
}

void export_penultimate(const EinModel& model, const Corpus& corpus,
                        const std::vector<Lexicon>& lexicons, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open for writing: " + path);
    out << "id,label";
    for (int i = 0; i < model.config().dense_b_units; ++i) out << ",v" << i;
    out << "\n";
    out.precision(9);
    for (const auto& doc : corpus.documents) {
        Eigen::VectorXd emo = model.config().dense_a_units > 0
                                  ? emotion_features(doc, lexicons).values
                                  : Eigen::VectorXd::Zero(model.emotion_dim());
        auto intro = model.introspect(doc.tokens, emo);
        out << doc.id << "," << doc.label;
        for (Eigen::Index i = 0; i < intro.penultimate.size(); ++i)
            out << "," << static_cast<float>(intro.penultimate[i]);
        out << "\n";
    }
    if (!out) throw ParseError("write failed: " + path);
}

}  // namespace ein
