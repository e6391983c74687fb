#include "geodl/metrics.hpp"

#include <numeric>

namespace geodl {

double evaluate(const ModelState& model, const LabeledSet& test) {
    if (test.empty()) throw Error("evaluate: empty test set");
    const Matrix z = model.encoder.encode_batch(test.x);
    Index correct = 0;
    for (Index j = 0; j < test.size(); ++j) {
        const int label = test.labels[static_cast<std::size_t>(j)];
        if (label < 0 || label >= model.num_classes())
            throw Error("evaluate: label " + std::to_string(label) + " has no prototype");
        if (predict(z.col(j), model.prototypes) == label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(test.size());
}

ExperimentReport compute_metrics(const std::vector<double>& per_task_accuracy,
                                 double base_accuracy_initial, double base_accuracy_final) {
    if (per_task_accuracy.empty()) throw Error("compute_metrics: no per-task accuracies");
    ExperimentReport r;
    r.per_task_accuracy = per_task_accuracy;
    r.base_accuracy_initial = base_accuracy_initial;
    r.base_accuracy_final = base_accuracy_final;
    r.average_accuracy = std::accumulate(per_task_accuracy.begin(), per_task_accuracy.end(), 0.0) /
                         static_cast<double>(per_task_accuracy.size());
    r.forgetting_rate = base_accuracy_initial - base_accuracy_final;
    return r;
}

}  // namespace geodl
