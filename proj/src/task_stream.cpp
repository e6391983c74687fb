#include "geodl/task_stream.hpp"

#include "geodl/rng.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace geodl {

void TaskStreamSpec::validate() const {
    if (input_dim < 1) throw Error("input_dim must be >= 1");
    if (classes_total < 2) throw Error("classes_total must be >= 2");
    if (base_classes < 1) throw Error("base_classes must be >= 1");
    if (tasks < 1) throw Error("tasks must be >= 1");
    if (classes_per_task < 1) throw Error("classes_per_task must be >= 1");
    if (base_classes + tasks * classes_per_task != classes_total)
        throw Error("inconsistent counts: base_classes + tasks * classes_per_task = " +
                    std::to_string(base_classes + tasks * classes_per_task) +
                    " but classes_total = " + std::to_string(classes_total));
    if (train_per_class < 1 || test_per_class < 1)
        throw Error("per-class train/test counts must be >= 1");
    if (!(noise_sigma >= 0.0)) throw Error("noise_sigma must be >= 0");
}

Matrix LabeledSet::samples_of(int label) const {
    std::vector<Index> cols;
    for (Index j = 0; j < size(); ++j)
        if (labels[static_cast<std::size_t>(j)] == label) cols.push_back(j);
    Matrix out(x.rows(), static_cast<Index>(cols.size()));
    for (Index k = 0; k < out.cols(); ++k) out.col(k) = x.col(cols[static_cast<std::size_t>(k)]);
    return out;
}

LabeledSet concat(const LabeledSet& a, const LabeledSet& b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    if (a.x.rows() != b.x.rows()) throw Error("concat: input dimensions differ");
    LabeledSet out;
    out.x.resize(a.x.rows(), a.size() + b.size());
    out.x << a.x, b.x;
    out.labels = a.labels;
    out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
    return out;
}

LabeledSet RealizedStream::test_up_to(int t) const {
    LabeledSet out;
    for (int k = 0; k <= t; ++k) out = concat(out, tasks.at(static_cast<std::size_t>(k)).test);
    return out;
}

int RealizedStream::classes_up_to(int t) const {
    return spec.base_classes + t * spec.classes_per_task;
}

RealizedStream make_task_stream(const TaskStreamSpec& spec) {
    spec.validate();
    const int dim = spec.input_dim;
    const int num_classes = spec.classes_total;
    const int per_class = spec.train_per_class + spec.test_per_class;

    Rng rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    RealizedStream out;
    out.spec = spec;
    out.class_means.resize(dim, num_classes);
    for (int c = 0; c < num_classes; ++c)
        for (int i = 0; i < dim; ++i) out.class_means(i, c) = kClassMeanScale * normal(rng);

    // samples[c] holds train columns first, then test columns
    std::vector<Matrix> samples(static_cast<std::size_t>(num_classes));
    for (int c = 0; c < num_classes; ++c) {
        Matrix& s = samples[static_cast<std::size_t>(c)];
        s.resize(dim, per_class);
        for (int j = 0; j < per_class; ++j)
            for (int i = 0; i < dim; ++i)
                s(i, j) = out.class_means(i, c) + spec.noise_sigma * normal(rng);
    }

    out.class_order.resize(static_cast<std::size_t>(num_classes));
    std::iota(out.class_order.begin(), out.class_order.end(), 0);
    std::shuffle(out.class_order.begin(), out.class_order.end(), rng);

    auto build_task = [&](int first_label, int count) {
        TaskData task;
        task.train.x.resize(dim, static_cast<Index>(count) * spec.train_per_class);
        task.test.x.resize(dim, static_cast<Index>(count) * spec.test_per_class);
        for (int k = 0; k < count; ++k) {
            const int label = first_label + k;
            const Matrix& s = samples[static_cast<std::size_t>(out.class_order[static_cast<std::size_t>(label)])];
            task.labels.push_back(label);
            task.train.x.middleCols(static_cast<Index>(k) * spec.train_per_class, spec.train_per_class) =
                s.leftCols(spec.train_per_class);
            task.test.x.middleCols(static_cast<Index>(k) * spec.test_per_class, spec.test_per_class) =
                s.rightCols(spec.test_per_class);
            task.train.labels.insert(task.train.labels.end(), static_cast<std::size_t>(spec.train_per_class), label);
            task.test.labels.insert(task.test.labels.end(), static_cast<std::size_t>(spec.test_per_class), label);
        }
        return task;
    };

    out.tasks.push_back(build_task(0, spec.base_classes));
    for (int t = 1; t <= spec.tasks; ++t)
        out.tasks.push_back(build_task(out.classes_up_to(t - 1), spec.classes_per_task));
    return out;
}

}  // namespace geodl
