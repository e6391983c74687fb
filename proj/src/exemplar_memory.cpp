#include "geodl/exemplar_memory.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace geodl {

std::vector<Index> select_exemplars(const Matrix& features, Index k) {
    const Index count = features.cols();
    if (count == 0) throw Error("select_exemplars: empty class");
    if (k < 0 || k > count)
        throw Error("select_exemplars: k = " + std::to_string(k) + " exceeds class size " +
                    std::to_string(count));

    Matrix normalized = features;
    for (Index j = 0; j < count; ++j) {
        const double nrm = normalized.col(j).norm();
        if (nrm > 0.0) normalized.col(j) /= nrm;
    }
    Vector mean = normalized.rowwise().mean();
    const double mean_norm = mean.norm();
    if (mean_norm > 0.0) mean /= mean_norm;

    const Vector similarity = normalized.transpose() * mean;
    std::vector<Index> order(static_cast<std::size_t>(count));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return similarity(a) > similarity(b); });
    order.resize(static_cast<std::size_t>(k));
    return order;
}

ExemplarMemory::ExemplarMemory(int budget_per_class) : budget_(budget_per_class) {
    if (budget_ < 0) throw Error("memory budget must be >= 0");
}

void ExemplarMemory::store(int label, const Matrix& inputs) {
    if (contains(label)) throw Error("class " + std::to_string(label) + " already in memory");
    const Index kept = std::min<Index>(inputs.cols(), budget_);
    store_.emplace(label, inputs.leftCols(kept));
}

std::vector<int> ExemplarMemory::classes() const {
    std::vector<int> out;
    for (const auto& [label, _] : store_) out.push_back(label);
    return out;
}

Index ExemplarMemory::total_size() const {
    Index n = 0;
    for (const auto& [_, m] : store_) n += m.cols();
    return n;
}

const Matrix& ExemplarMemory::inputs_of(int label) const {
    const auto it = store_.find(label);
    if (it == store_.end()) throw Error("class " + std::to_string(label) + " not in memory");
    return it->second;
}

LabeledSet ExemplarMemory::as_labeled_set() const {
    LabeledSet out;
    const Index total = total_size();
    if (total == 0) return out;
    out.x.resize(store_.begin()->second.rows(), total);
    Index col = 0;
    for (const auto& [label, m] : store_) {
        out.x.middleCols(col, m.cols()) = m;
        out.labels.insert(out.labels.end(), static_cast<std::size_t>(m.cols()), label);
        col += m.cols();
    }
    return out;
}

}  // namespace geodl
