#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fstat/rng.hpp"
#include "fstat/triplet.hpp"

using namespace fse;

namespace {

LabeledEmbeddingBatch random_batch(fse::Rng& rng, int n_labels, int members, int dim) {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int l = 0; l < n_labels; ++l) {
    for (int m = 0; m < members; ++m) {
      std::vector<double> row(dim);
      for (double& v : row) v = rng.normal(l * 1.5, 1.0);
      rows.push_back(std::move(row));
      labels.push_back(l);
    }
  }
  return LabeledEmbeddingBatch::from_rows(rows, labels);
}

std::vector<double> fd_grad(const LabeledEmbeddingBatch& batch, double margin, double h) {
  LabeledEmbeddingBatch work = batch;
  std::vector<double> grad(batch.embeddings.size());
  for (std::size_t i = 0; i < batch.embeddings.size(); ++i) {
    const double orig = work.embeddings[i];
    work.embeddings[i] = orig + h;
    const double up = triplet_loss(work, margin);
    work.embeddings[i] = orig - h;
    const double down = triplet_loss(work, margin);
    work.embeddings[i] = orig;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

// hinge terms near zero or coincident points make the loss non-smooth
bool well_posed(const LabeledEmbeddingBatch& batch, double margin) {
  const std::size_t n = batch.size();
  auto dist = [&](std::size_t i, std::size_t j) {
    double acc = 0.0;
    for (int k = 0; k < batch.dim; ++k) {
      const double d = batch.at(i, k) - batch.at(j, k);
      acc += d * d;
    }
    return std::sqrt(acc);
  };
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t p = 0; p < n; ++p) {
      if (p == a) continue;
      if (dist(a, p) < 1e-3) return false;
      if (batch.labels[p] != batch.labels[a]) continue;
      for (std::size_t neg = 0; neg < n; ++neg) {
        if (batch.labels[neg] == batch.labels[a]) continue;
        if (std::fabs(dist(a, p) - dist(a, neg) + margin) < 1e-3) return false;
      }
    }
  }
  return true;
}

}  // namespace

TEST_CASE("triplet_loss hand-worked values") {
  // d(a,p) = 0, d(a,n) = 1: hinge inactive
  auto easy = LabeledEmbeddingBatch::from_rows({{0.0}, {0.0}, {1.0}}, {0, 0, 1});
  CHECK(triplet_loss(easy, 0.1) == 0.0);

  // a=0, p=1, n=0.5: both ordered triplets give 1 - 0.5 + 0.1
  auto active = LabeledEmbeddingBatch::from_rows({{0.0}, {1.0}, {0.5}}, {0, 0, 1});
  CHECK(triplet_loss(active, 0.1) == doctest::Approx(0.6).epsilon(1e-12));

  // coincident everything at margin zero
  auto flat = LabeledEmbeddingBatch::from_rows({{2.0}, {2.0}, {2.0}}, {0, 0, 1});
  CHECK(triplet_loss(flat, 0.0) == 0.0);

  // no valid triplet: two singleton labels
  auto singletons = LabeledEmbeddingBatch::from_rows({{0.0}, {1.0}}, {0, 1});
  CHECK_THROWS_AS(triplet_loss(singletons, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(triplet_loss(active, -0.5), std::invalid_argument);
}

TEST_CASE("triplet loss is zero iff margins hold for every triplet") {
  fse::Rng rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const double margin = 0.1;
    const auto batch = random_batch(rng, 2, 3, 2);
    const double loss = triplet_loss(batch, margin);

    bool all_satisfied = true;
    const std::size_t n = batch.size();
    auto dist = [&](std::size_t i, std::size_t j) {
      double acc = 0.0;
      for (int k = 0; k < batch.dim; ++k) {
        const double d = batch.at(i, k) - batch.at(j, k);
        acc += d * d;
      }
      return std::sqrt(acc);
    };
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t p = 0; p < n; ++p) {
        if (p == a || batch.labels[p] != batch.labels[a]) continue;
        for (std::size_t neg = 0; neg < n; ++neg) {
          if (batch.labels[neg] == batch.labels[a]) continue;
          if (dist(a, p) + margin > dist(a, neg)) all_satisfied = false;
        }
      }
    }
    CHECK((loss == 0.0) == all_satisfied);
  }
}

TEST_CASE("triplet loss is invariant to rotation and translation") {
  fse::Rng rng(37);
  for (int trial = 0; trial < 25; ++trial) {
    const auto batch = random_batch(rng, 3, 3, 2);
    const double base = triplet_loss(batch, 0.1);

    const double theta = rng.uniform(0.0, 6.28318530717958648);
    const double c = std::cos(theta), s = std::sin(theta);
    const double tx = rng.uniform(-5.0, 5.0), ty = rng.uniform(-5.0, 5.0);
    LabeledEmbeddingBatch moved = batch;
    for (std::size_t i = 0; i < moved.size(); ++i) {
      const double x = batch.at(i, 0), y = batch.at(i, 1);
      moved.embeddings[i * 2 + 0] = c * x - s * y + tx;
      moved.embeddings[i * 2 + 1] = s * x + c * y + ty;
    }
    CHECK(std::fabs(triplet_loss(moved, 0.1) - base) <= 1e-9 * std::max(1.0, base));
  }
}

TEST_CASE("triplet_loss_grad: inactive hinges give a zero gradient") {
  auto easy = LabeledEmbeddingBatch::from_rows({{0.0}, {0.1}, {9.0}, {9.1}}, {0, 0, 1, 1});
  for (double g : triplet_loss_grad(easy, 0.1)) CHECK(g == 0.0);
}

TEST_CASE("triplet_loss_grad sign on an active 1-D triplet") {
  // anchor 0, positive 1, negative 0.5
  auto batch = LabeledEmbeddingBatch::from_rows({{0.0}, {1.0}, {0.5}}, {0, 0, 1});
  const auto grad = triplet_loss_grad(batch, 0.1);
  const auto numeric = fd_grad(batch, 0.1, 1e-6);
  for (std::size_t i = 0; i < grad.size(); ++i) {
    CHECK(grad[i] == doctest::Approx(numeric[i]).epsilon(1e-6));
  }
  // the anchor is pulled toward the positive (upward) and away from the negative
  CHECK(grad[0] < 0.0);
}

TEST_CASE("triplet_loss_grad matches central finite differences") {
  fse::Rng rng(41);
  int checked = 0;
  while (checked < 25) {
    const auto batch = random_batch(rng, 2, 3, 2);
    if (!well_posed(batch, 0.1)) continue;
    ++checked;
    const auto analytic = triplet_loss_grad(batch, 0.1);
    const auto numeric = fd_grad(batch, 0.1, 1e-6);
    double scale = 0.0;
    for (double g : analytic) scale = std::max(scale, std::fabs(g));
    for (std::size_t i = 0; i < analytic.size(); ++i) {
      CHECK(std::fabs(analytic[i] - numeric[i]) <= 1e-4 * std::max(scale, 1e-12));
    }
  }
}
