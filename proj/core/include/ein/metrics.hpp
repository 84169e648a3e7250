#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace ein {

/// Accuracy and macro metrics as percentages (0..100), plus the confusion
/// matrix and the per-class TP ratio (diagonal over gold count). Classes never
/// predicted contribute precision 0 to the macro mean.
struct MetricsReport {
    double accuracy = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    std::vector<std::string> classes;  // sorted
    // confusion[i][j] = count of gold class i predicted as class j.
    std::vector<std::vector<std::size_t>> confusion;
    std::map<std::string, double> per_class_tp_ratio;

    std::string to_json() const;
};

MetricsReport compute_metrics(const std::vector<std::string>& predictions,
                              const std::vector<std::string>& gold,
                              const std::set<std::string>& label_set);

}  // namespace ein
