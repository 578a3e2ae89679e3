#include "fstat/triplet.hpp"

#include <cmath>
#include <stdexcept>

namespace fse {

namespace {

double l2(const LabeledEmbeddingBatch& batch, std::size_t i, std::size_t j) {
  double acc = 0.0;
  for (int k = 0; k < batch.dim; ++k) {
    const double d = batch.at(i, k) - batch.at(j, k);
    acc += d * d;
  }
  return std::sqrt(acc);
}

template <typename Fn>
std::size_t for_each_triplet(const LabeledEmbeddingBatch& batch, Fn&& fn) {
  const std::size_t n = batch.size();
  std::size_t count = 0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t p = 0; p < n; ++p) {
      if (p == a || batch.labels[p] != batch.labels[a]) continue;
      for (std::size_t neg = 0; neg < n; ++neg) {
        if (batch.labels[neg] == batch.labels[a]) continue;
        fn(a, p, neg);
        ++count;
      }
    }
  }
  return count;
}

}  // namespace

double triplet_loss(const LabeledEmbeddingBatch& batch, double margin) {
  if (margin < 0.0) throw std::invalid_argument("triplet_loss: margin must be >= 0");
  double total = 0.0;
  const std::size_t count = for_each_triplet(batch, [&](std::size_t a, std::size_t p, std::size_t n) {
    total += std::max(0.0, l2(batch, a, p) - l2(batch, a, n) + margin);
  });
  if (count == 0) throw std::invalid_argument("triplet_loss: batch contains no valid triplet");
  return total / static_cast<double>(count);
}

std::vector<double> triplet_loss_grad(const LabeledEmbeddingBatch& batch, double margin) {
  if (margin < 0.0) throw std::invalid_argument("triplet_loss: margin must be >= 0");
  const std::size_t dim = static_cast<std::size_t>(batch.dim);
  std::vector<double> grad(batch.size() * dim, 0.0);

  // accumulate d distance / d endpoints for one active hinge term
  auto add_dist_grad = [&](std::size_t i, std::size_t j, double scale) {
    const double d = l2(batch, i, j);
    if (d == 0.0) return;  // subgradient 0 at coincident points
    for (std::size_t k = 0; k < dim; ++k) {
      const double u = scale * (batch.embeddings[i * dim + k] - batch.embeddings[j * dim + k]) / d;
      grad[i * dim + k] += u;
      grad[j * dim + k] -= u;
    }
  };

  std::size_t count = 0;
  for_each_triplet(batch, [&](std::size_t a, std::size_t p, std::size_t n) { (void)a; (void)p; (void)n; ++count; });
  if (count == 0) throw std::invalid_argument("triplet_loss: batch contains no valid triplet");
  const double inv = 1.0 / static_cast<double>(count);

  for_each_triplet(batch, [&](std::size_t a, std::size_t p, std::size_t n) {
    const double hinge = l2(batch, a, p) - l2(batch, a, n) + margin;
    if (hinge <= 0.0) return;
    add_dist_grad(a, p, inv);    // pull anchor and positive together
    add_dist_grad(a, n, -inv);   // push anchor and negative apart
  });
  return grad;
}

}  // namespace fse
