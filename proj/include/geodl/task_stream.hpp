#pragma once

#include "geodl/linalg.hpp"

#include <cstdint>
#include <vector>

namespace geodl {

/// Parameters of the synthetic class-incremental problem. Class means are
/// drawn from an isotropic Gaussian with standard deviation kClassMeanScale,
/// samples are mean + noise_sigma·N(0, I).
struct TaskStreamSpec {
    int input_dim = 16;
    int classes_total = 20;
    int base_classes = 10;
    int tasks = 5;
    int classes_per_task = 2;
    int train_per_class = 100;
    int test_per_class = 50;
    double noise_sigma = 0.8;
    std::uint64_t seed = 0;

    void validate() const;
};

inline constexpr double kClassMeanScale = 3.0;

/// Inputs as columns with one label per column. Labels are the position of
/// the class in the stream order, so task 0 holds labels [0, base) and task
/// t holds the next classes_per_task labels.
struct LabeledSet {
    Matrix x;
    std::vector<int> labels;

    Index size() const noexcept { return x.cols(); }
    bool empty() const noexcept { return x.cols() == 0; }

    /// Columns carrying the given label, in original order.
    Matrix samples_of(int label) const;
};

LabeledSet concat(const LabeledSet& a, const LabeledSet& b);

struct TaskData {
    std::vector<int> labels;  // labels introduced by this task
    LabeledSet train;
    LabeledSet test;
};

struct RealizedStream {
    TaskStreamSpec spec;
    Matrix class_means;           // D×K, column = original class id
    std::vector<int> class_order; // class_order[label] = original class id
    std::vector<TaskData> tasks;  // tasks[0] is the base task

    /// Union of the test sets of tasks 0..t.
    LabeledSet test_up_to(int t) const;
    int classes_up_to(int t) const;
};

RealizedStream make_task_stream(const TaskStreamSpec& spec);

}  // namespace geodl
