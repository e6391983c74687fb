#pragma once

#include "geodl/model.hpp"
#include "geodl/task_stream.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace geodl {

/// Fraction of samples whose most likely class equals the label.
double evaluate(const ModelState& model, const LabeledSet& test);

struct ExperimentReport {
    std::vector<double> per_task_accuracy;  // A_1 .. A_T
    double base_accuracy_initial = 0.0;     // A_0 under Φ_0
    double base_accuracy_final = 0.0;       // A_0 under Φ_T
    double average_accuracy = 0.0;
    double forgetting_rate = 0.0;
    std::string config_hash;
    std::uint64_t seed = 0;
};

/// A = mean of per-task accuracies, F = A_0|Φ_0 − A_0|Φ_T.
ExperimentReport compute_metrics(const std::vector<double>& per_task_accuracy,
                                 double base_accuracy_initial, double base_accuracy_final);

}  // namespace geodl
