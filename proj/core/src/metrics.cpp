#include "ein/metrics.hpp"

#include <algorithm>

#include <json.hpp>

#include "ein/errors.hpp"

namespace ein {

MetricsReport compute_metrics(const std::vector<std::string>& predictions,
                              const std::vector<std::string>& gold,
                              const std::set<std::string>& label_set) {
    if (predictions.empty() || predictions.size() != gold.size())
        throw ValidationError("compute_metrics: predictions and gold must be equal-length and non-empty");

    MetricsReport rep;
    rep.classes.assign(label_set.begin(), label_set.end());
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < rep.classes.size(); ++i) index[rep.classes[i]] = i;

    const std::size_t k = rep.classes.size();
    rep.confusion.assign(k, std::vector<std::size_t>(k, 0));
    for (std::size_t i = 0; i < gold.size(); ++i) {
        auto gi = index.find(gold[i]);
        auto pi = index.find(predictions[i]);
        if (gi == index.end() || pi == index.end())
            throw ValidationError("compute_metrics: label outside the declared set");
        rep.confusion[gi->second][pi->second]++;
    }

    std::size_t correct = 0;
    double prec_sum = 0.0, rec_sum = 0.0, f1_sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t tp = rep.confusion[c][c];
        correct += tp;
        std::size_t gold_count = 0, pred_count = 0;
        for (std::size_t j = 0; j < k; ++j) {
            gold_count += rep.confusion[c][j];
            pred_count += rep.confusion[j][c];
        }
        double precision = pred_count ? double(tp) / double(pred_count) : 0.0;
        double recall = gold_count ? double(tp) / double(gold_count) : 0.0;
        double f1 = (precision + recall) > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
        prec_sum += precision;
        rec_sum += recall;
        f1_sum += f1;
        rep.per_class_tp_ratio[rep.classes[c]] = 100.0 * recall;
    }
    rep.accuracy = 100.0 * double(correct) / double(gold.size());
    rep.macro_precision = 100.0 * prec_sum / double(k);
    rep.macro_recall = 100.0 * rec_sum / double(k);
    rep.macro_f1 = 100.0 * f1_sum / double(k);
    return rep;
}

std::string MetricsReport::to_json() const {
    nlohmann::json j;
    j["accuracy"] = accuracy;
    j["macro_precision"] = macro_precision;
    j["macro_recall"] = macro_recall;
    j["macro_f1"] = macro_f1;
    j["classes"] = classes;
    j["confusion"] = confusion;
    j["per_class_tp_ratio"] = per_class_tp_ratio;
    return j.dump(2);
}

}  // namespace ein
