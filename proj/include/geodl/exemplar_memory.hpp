#pragma once

#include "geodl/linalg.hpp"
#include "geodl/task_stream.hpp"

#include <map>
#include <vector>

namespace geodl {

/// Indices of the k samples whose features are closest in cosine to the mean
/// of the L2-normalized features (columns). Sorted by decreasing similarity,
/// ties broken by ascending sample index.
std::vector<Index> select_exemplars(const Matrix& features, Index k);

/// Raw-input replay memory with a per-class budget.
class ExemplarMemory {
public:
    explicit ExemplarMemory(int budget_per_class = 10);

    int budget_per_class() const noexcept { return budget_; }

    /// Stores (at most budget) inputs for a class not yet in memory.
    void store(int label, const Matrix& inputs);

    bool contains(int label) const { return store_.count(label) != 0; }
    std::vector<int> classes() const;
    Index total_size() const;
    const Matrix& inputs_of(int label) const;

    /// Every stored sample with its label, classes in ascending order.
    LabeledSet as_labeled_set() const;

private:
    int budget_;
    std::map<int, Matrix> store_;
};

}  // namespace geodl
