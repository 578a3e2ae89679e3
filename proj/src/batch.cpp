#include "fstat/batch.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "fstat/errors.hpp"

namespace fse {

LabeledEmbeddingBatch::LabeledEmbeddingBatch(int d, std::vector<double> values,
                                             std::vector<int> ids)
    : dim(d), embeddings(std::move(values)), labels(std::move(ids)) {
  if (dim <= 0) throw shape_error("batch: embedding dimension must be positive");
  if (embeddings.size() != labels.size() * static_cast<std::size_t>(dim)) {
    throw shape_error("batch: embedding buffer does not match labels * dim");
  }
}

LabeledEmbeddingBatch LabeledEmbeddingBatch::from_rows(
    const std::vector<std::vector<double>>& rows, std::vector<int> ids) {
  if (rows.size() != ids.size()) {
    throw shape_error("batch: row count does not match label count");
  }
  if (rows.empty()) throw shape_error("batch: empty");
  const int d = static_cast<int>(rows.front().size());
  std::vector<double> flat;
  flat.reserve(rows.size() * rows.front().size());
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != d) {
      throw shape_error("batch: rows have inconsistent dimensionality");
    }
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return LabeledEmbeddingBatch(d, std::move(flat), std::move(ids));
}

std::vector<int> LabeledEmbeddingBatch::distinct_labels() const {
  std::vector<int> out(labels);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::size_t> LabeledEmbeddingBatch::indices_of(int label) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) out.push_back(i);
  }
  return out;
}

void LabeledEmbeddingBatch::validate() const {
  if (dim <= 0 || embeddings.size() != labels.size() * static_cast<std::size_t>(dim)) {
    throw shape_error("batch: inconsistent shape");
  }
  for (double v : embeddings) {
    if (!std::isfinite(v)) throw std::invalid_argument("batch: non-finite embedding value");
  }
  std::map<int, int> counts;
  for (int l : labels) ++counts[l];
  for (const auto& [label, count] : counts) {
    if (count < 2) {
      throw std::invalid_argument("batch: label " + std::to_string(label) +
                                  " has fewer than two members");
    }
  }
}

}  // namespace fse
