#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fse {

// A minibatch of D-dimensional embeddings, each tagged with an opaque integer
// label (class identity or factor value). Losses require every label present
// to have at least two members so within-group variance is defined.
struct LabeledEmbeddingBatch {
  int dim = 0;
  std::vector<double> embeddings;  // row-major, size() == labels.size() * dim
  std::vector<int> labels;

  LabeledEmbeddingBatch() = default;
  LabeledEmbeddingBatch(int d, std::vector<double> values, std::vector<int> ids);

  static LabeledEmbeddingBatch from_rows(const std::vector<std::vector<double>>& rows,
                                         std::vector<int> ids);

  std::size_t size() const { return labels.size(); }

  double at(std::size_t i, int k) const {
    return embeddings[i * static_cast<std::size_t>(dim) + static_cast<std::size_t>(k)];
  }

  std::span<const double> row(std::size_t i) const {
    return {embeddings.data() + i * static_cast<std::size_t>(dim),
            static_cast<std::size_t>(dim)};
  }

  // Distinct labels, ascending.
  std::vector<int> distinct_labels() const;

  // Indices of instances carrying `label`, in batch order.
  std::vector<std::size_t> indices_of(int label) const;

  // Throws if shapes are inconsistent, values are non-finite, or some label
  // has fewer than two members.
  void validate() const;
};

}  // namespace fse
