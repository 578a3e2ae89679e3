#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "fstat/floss.hpp"
#include "fstat/rng.hpp"
#include "oracles.hpp"

using namespace fse;

namespace {

LabeledEmbeddingBatch batch_1d(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (double v : a) {
    rows.push_back({v});
    labels.push_back(0);
  }
  for (double v : b) {
    rows.push_back({v});
    labels.push_back(1);
  }
  return LabeledEmbeddingBatch::from_rows(rows, labels);
}

LabeledEmbeddingBatch random_batch(fse::Rng& rng, int n_labels, int members, int dim,
                                   double spread) {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int l = 0; l < n_labels; ++l) {
    std::vector<double> center(dim);
    for (double& c : center) c = rng.normal(0.0, spread);
    for (int m = 0; m < members; ++m) {
      std::vector<double> row(dim);
      for (int k = 0; k < dim; ++k) row[k] = center[k] + rng.normal();
      rows.push_back(std::move(row));
      labels.push_back(l);
    }
  }
  return LabeledEmbeddingBatch::from_rows(rows, labels);
}

// Keep finite-difference checks away from selection ties, the phi floor, and
// saturated pairs, where the loss is non-smooth or flat.
bool well_posed(const LabeledEmbeddingBatch& batch, const FLossConfig& cfg) {
  const SeparationTable table = build_separation_table(batch);
  for (const auto& row : table.pairs) {
    std::vector<double> sorted(row.phi.begin(), row.phi.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    if (cfg.d < static_cast<int>(sorted.size()) &&
        sorted[cfg.d - 1] - sorted[cfg.d] < 1e-3) {
      return false;
    }
    for (int i = 0; i < cfg.d; ++i) {
      if (sorted[i] < 0.05 || sorted[i] > 1.0 - 1e-9) return false;
    }
  }
  return true;
}

std::vector<double> fd_grad(const LabeledEmbeddingBatch& batch, const FLossConfig& cfg,
                            double h) {
  LabeledEmbeddingBatch work = batch;
  std::vector<double> grad(batch.embeddings.size());
  for (std::size_t i = 0; i < batch.embeddings.size(); ++i) {
    const double orig = work.embeddings[i];
    work.embeddings[i] = orig + h;
    const double up = f_loss(work, cfg);
    work.embeddings[i] = orig - h;
    const double down = f_loss(work, cfg);
    work.embeddings[i] = orig;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace

TEST_CASE("f_statistic_per_dim hand-worked values") {
  // n~ = 2, between = 100, within = 1
  CHECK(f_statistic_per_dim(batch_1d({0, 1}, {10, 11}), 0, 1, 0) == doctest::Approx(200.0).epsilon(1e-12));
  // equal class means
  CHECK(f_statistic_per_dim(batch_1d({-1, 1}, {-1, 1}), 0, 1, 0) == 0.0);
  // n~ = 2, between = 1, within = 4
  CHECK(f_statistic_per_dim(batch_1d({0, 2}, {1, 3}), 0, 1, 0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("f_statistic_per_dim rejects degenerate groups") {
  std::vector<std::vector<double>> rows = {{0.0}, {1.0}, {5.0}};
  auto batch = LabeledEmbeddingBatch::from_rows(rows, {0, 0, 1});
  CHECK_THROWS_AS(f_statistic_per_dim(batch, 0, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(f_statistic_per_dim(batch, 0, 0, 0), std::invalid_argument);
}

TEST_CASE("separation_probability closed forms") {
  CHECK(separation_probability(0.0, 2.0) == 0.0);
  CHECK(std::fabs(separation_probability(200.0, 2.0) - std::sqrt(200.0 / 202.0)) < 1e-12);
  CHECK(std::fabs(separation_probability(0.5, 2.0) - std::sqrt(0.2)) < 1e-12);
  CHECK_THROWS_AS(separation_probability(1.0, 0.5), std::domain_error);
  CHECK_THROWS_AS(separation_probability(-1.0, 2.0), std::domain_error);
}

TEST_CASE("t-squared equivalence on balanced two-class batches") {
  fse::Rng rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_index(9));
    std::vector<double> a(n), b(n);
    for (double& v : a) v = rng.normal(0.0, 1.0 + rng.uniform01());
    for (double& v : b) v = rng.normal(rng.uniform(-3.0, 3.0), 1.0 + rng.uniform01());
    const auto batch = batch_1d(a, b);

    double mean_a = 0.0, mean_b = 0.0;
    for (double v : a) mean_a += v;
    for (double v : b) mean_b += v;
    mean_a /= n;
    mean_b /= n;
    double ss = 0.0;
    for (double v : a) ss += (v - mean_a) * (v - mean_a);
    for (double v : b) ss += (v - mean_b) * (v - mean_b);
    if (ss < 1e-9) continue;
    const double sp2 = ss / (2.0 * n - 2.0);
    const double t = (mean_a - mean_b) / std::sqrt(sp2 * (1.0 / n + 1.0 / n));
    const double s = f_statistic_per_dim(batch, 0, 1, 0);
    CHECK(std::fabs(s - t * t) <= 1e-9 * std::max(1.0, std::fabs(t * t)));
  }
}

TEST_CASE("build_separation_table enumerates unordered pairs with phi consistency") {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  fse::Rng rng(11);
  for (int l : {3, 7, 9}) {
    for (int m = 0; m < 4; ++m) {
      rows.push_back({rng.normal(), rng.normal(l, 1.0), rng.normal()});
      labels.push_back(l);
    }
  }
  const auto batch = LabeledEmbeddingBatch::from_rows(rows, labels);
  const auto table = build_separation_table(batch);
  REQUIRE(table.pairs.size() == 3);
  CHECK(table.pairs[0].label_a == 3);
  CHECK(table.pairs[0].label_b == 7);
  CHECK(table.pairs[1].label_a == 3);
  CHECK(table.pairs[1].label_b == 9);
  CHECK(table.pairs[2].label_a == 7);
  CHECK(table.pairs[2].label_b == 9);
  for (const auto& row : table.pairs) {
    CHECK(row.n_tilde == 6.0);
    REQUIRE(row.s.size() == 3);
    for (int k = 0; k < 3; ++k) {
      CHECK(row.phi[k] == separation_probability(row.s[k], row.n_tilde));
    }
  }

  const auto single = build_separation_table(batch_1d({0, 1}, {10, 11}));
  REQUIRE(single.pairs.size() == 1);
  CHECK(single.pairs[0].s[0] == doctest::Approx(200.0).epsilon(1e-12));
  CHECK(std::fabs(single.pairs[0].phi[0] - 0.9950371902099892) < 1e-9);

  auto lone = LabeledEmbeddingBatch::from_rows({{0.0}, {1.0}}, {5, 5});
  CHECK_THROWS_AS(build_separation_table(lone), std::invalid_argument);
}

TEST_CASE("select_dimensions picks the largest phi, ties to the lowest index") {
  const std::vector<double> a{0.9, 0.99, 0.5};
  CHECK(select_dimensions(a, 2) == std::vector<int>{0, 1});
  const std::vector<double> ties{0.5, 0.5, 0.5};
  CHECK(select_dimensions(ties, 1) == std::vector<int>{0});
  const std::vector<double> b{0.1, 0.2, 0.99, 0.3};
  CHECK(select_dimensions(b, 1) == std::vector<int>{2});
  CHECK_THROWS_AS(select_dimensions(b, 5), std::invalid_argument);
}

TEST_CASE("f_loss hand-worked values") {
  FLossConfig cfg;
  cfg.d = 1;
  // single pair, Phi = sqrt(200/202)
  CHECK(std::fabs(f_loss(batch_1d({0, 1}, {10, 11}), cfg) - 0.5 * std::log(202.0 / 200.0)) < 1e-12);

  // saturated separation: identical points within classes, classes far apart
  CHECK(f_loss(batch_1d({0, 0}, {10, 10}), cfg) <= 1e-12);

  // s = 2/3 makes Phi = sqrt((2/3)/(2/3+2)) = 1/2 exactly
  const double r = std::sqrt(2.0);
  const auto half = batch_1d({-2, 2}, {2 - r, 2 + r});
  CHECK(std::fabs(f_loss(half, cfg) - std::log(2.0)) < 1e-9);
}

TEST_CASE("f_loss equals the sum of per-pair public-op contributions") {
  fse::Rng rng(13);
  FLossConfig cfg;
  cfg.d = 2;
  const auto batch = random_batch(rng, 3, 5, 3, 2.0);
  double expected = 0.0;
  const std::vector<int> labels = batch.distinct_labels();
  for (std::size_t a = 0; a < labels.size(); ++a) {
    for (std::size_t b = a + 1; b < labels.size(); ++b) {
      const double n_tilde = 8.0;
      std::vector<double> phi(batch.dim);
      for (int k = 0; k < batch.dim; ++k) {
        phi[k] = separation_probability(
            f_statistic_per_dim(batch, labels[a], labels[b], k), n_tilde);
      }
      for (int k : select_dimensions(phi, cfg.d)) {
        expected -= std::log(std::max(phi[k], cfg.phi_floor));
      }
    }
  }
  CHECK(f_loss(batch, cfg) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("f_loss invariances: permutation, label swap, translation, per-dim scale") {
  fse::Rng rng(17);
  FLossConfig cfg;
  cfg.d = 2;
  for (int trial = 0; trial < 20; ++trial) {
    const auto batch = random_batch(rng, 3, 4, 3, 2.5);
    const double base = f_loss(batch, cfg);

    // permute instances within a class (swap two members of label 0)
    LabeledEmbeddingBatch permuted = batch;
    for (int k = 0; k < 3; ++k) {
      std::swap(permuted.embeddings[0 * 3 + k], permuted.embeddings[2 * 3 + k]);
    }
    CHECK(std::fabs(f_loss(permuted, cfg) - base) <= 1e-9 * std::max(1.0, base));

    // swap the two label ids
    LabeledEmbeddingBatch swapped = batch;
    for (int& l : swapped.labels) l = l == 0 ? 1 : (l == 1 ? 0 : l);
    CHECK(std::fabs(f_loss(swapped, cfg) - base) <= 1e-9 * std::max(1.0, base));

    // translate everything
    LabeledEmbeddingBatch shifted = batch;
    for (std::size_t i = 0; i < shifted.size(); ++i) {
      for (int k = 0; k < 3; ++k) shifted.embeddings[i * 3 + k] += 7.25 - 2.0 * k;
    }
    CHECK(std::fabs(f_loss(shifted, cfg) - base) <= 1e-9 * std::max(1.0, base));

    // scaling one dimension leaves that dimension's statistics unchanged
    LabeledEmbeddingBatch scaled = batch;
    for (std::size_t i = 0; i < scaled.size(); ++i) scaled.embeddings[i * 3 + 1] *= -3.5;
    const auto t0 = build_separation_table(batch);
    const auto t1 = build_separation_table(scaled);
    for (std::size_t p = 0; p < t0.pairs.size(); ++p) {
      CHECK(std::fabs(t1.pairs[p].s[1] - t0.pairs[p].s[1]) <=
            1e-9 * std::max(1.0, std::fabs(t0.pairs[p].s[1])));
    }
  }
}

TEST_CASE("f_loss is sensitive to rotation while the selection structure changes") {
  // classes separated along x only; a 45-degree rotation mixes the dimensions
  const std::vector<std::vector<double>> rows = {
      {0.0, 0.0}, {0.0, 1.0}, {3.0, 0.0}, {3.0, 1.0}};
  const std::vector<int> labels = {0, 0, 1, 1};
  const auto batch = LabeledEmbeddingBatch::from_rows(rows, labels);
  FLossConfig cfg;
  cfg.d = 1;
  const double base = f_loss(batch, cfg);

  const double c = std::cos(0.25 * 3.14159265358979323846);
  const double s = std::sin(0.25 * 3.14159265358979323846);
  std::vector<std::vector<double>> rotated;
  for (const auto& row : rows) {
    rotated.push_back({c * row[0] - s * row[1], s * row[0] + c * row[1]});
  }
  const double turned = f_loss(LabeledEmbeddingBatch::from_rows(rotated, labels), cfg);
  CHECK(std::fabs(turned - base) > 1e-3);
}

TEST_CASE("f_loss never increases as selected means move apart") {
  FLossConfig cfg;
  cfg.d = 1;
  double prev = std::numeric_limits<double>::infinity();
  for (double delta = 0.5; delta < 40.0; delta *= 1.3) {
    const double loss = f_loss(batch_1d({-0.5, 0.5}, {delta - 0.5, delta + 0.5}), cfg);
    CHECK(loss <= prev + 1e-12);
    prev = loss;
  }
}

TEST_CASE("f_loss_grad matches central finite differences on random batches") {
  fse::Rng rng(23);
  FLossConfig cfg;
  cfg.d = 1;
  int checked = 0;
  while (checked < 25) {
    const auto batch = random_batch(rng, 2, 4, 2, 2.0);
    if (!well_posed(batch, cfg)) continue;
    ++checked;
    const auto analytic = f_loss_grad(batch, cfg);
    const auto numeric = fd_grad(batch, cfg, 1e-6);
    double scale = 0.0;
    for (double g : analytic) scale = std::max(scale, std::fabs(g));
    REQUIRE(scale > 0.0);
    for (std::size_t i = 0; i < analytic.size(); ++i) {
      CHECK(std::fabs(analytic[i] - numeric[i]) <= 1e-4 * scale);
    }
  }
}

TEST_CASE("f_loss_grad pushes nearly coincident class means apart") {
  // means differ by 1e-4; the pair sits far up the -ln sqrt branch
  const auto batch = batch_1d({-1.0, 1.0}, {-1.0 + 1e-4, 1.0 + 1e-4});
  FLossConfig cfg;
  cfg.d = 1;
  const auto grad = f_loss_grad(batch, cfg);
  REQUIRE(grad.size() == 4);
  // class means should move in opposite directions (apart)
  const double mean_grad_a = 0.5 * (grad[0] + grad[1]);
  const double mean_grad_b = 0.5 * (grad[2] + grad[3]);
  CHECK(mean_grad_a * mean_grad_b < 0.0);
  // descending the gradient increases the separation: mean_a moves down, mean_b up
  CHECK(mean_grad_a > 0.0);
  CHECK(mean_grad_b < 0.0);
  // sign agreement with a one-sided numeric probe
  const auto numeric = fd_grad(batch, cfg, 1e-7);
  CHECK(numeric[0] * grad[0] > 0.0);
  CHECK(numeric[2] * grad[2] > 0.0);
}

TEST_CASE("f_loss_grad vanishes once classes are reliably separated") {
  FLossConfig cfg;
  cfg.d = 1;
  // identical embeddings within each class, classes far apart
  const auto saturated = batch_1d({0.0, 0.0}, {50.0, 50.0});
  const auto grad = f_loss_eval(saturated, cfg);
  double norm = 0.0;
  for (double g : grad.grad) norm = std::max(norm, std::fabs(g));
  CHECK(norm < 1e-6);

  // the max-norm decays as the separation grows
  double prev_norm = std::numeric_limits<double>::infinity();
  for (double delta : {2.0, 20.0, 200.0, 2000.0}) {
    const auto g = f_loss_grad(batch_1d({-0.5, 0.5}, {delta - 0.5, delta + 0.5}), cfg);
    double n = 0.0;
    for (double v : g) n = std::max(n, std::fabs(v));
    CHECK(n < prev_norm);
    prev_norm = n;
  }
  CHECK(prev_norm < 1e-6);
}

TEST_CASE("f_loss_eval reports the minimum selected phi") {
  FLossConfig cfg;
  cfg.d = 1;
  const auto eval = f_loss_eval(batch_1d({0, 1}, {10, 11}), cfg);
  CHECK(std::fabs(eval.min_selected_phi - 0.9950371902099892) < 1e-9);
  CHECK(eval.loss == doctest::Approx(0.5 * std::log(202.0 / 200.0)).epsilon(1e-12));
}
