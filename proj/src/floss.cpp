#include "fstat/floss.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "fstat/specfun.hpp"

namespace fse {

namespace {

constexpr double kWithinFloor = 1e-12;

struct PairStats {
  double n_a = 0.0, n_b = 0.0;
  double mean_a = 0.0, mean_b = 0.0;
  double within = 0.0;  // unclamped pooled within-class sum of squares
};

PairStats pair_stats(const LabeledEmbeddingBatch& batch,
                     std::span<const std::size_t> ia,
                     std::span<const std::size_t> ib, int k) {
  PairStats st;
  st.n_a = static_cast<double>(ia.size());
  st.n_b = static_cast<double>(ib.size());
  for (std::size_t i : ia) st.mean_a += batch.at(i, k);
  for (std::size_t i : ib) st.mean_b += batch.at(i, k);
  st.mean_a /= st.n_a;
  st.mean_b /= st.n_b;
  for (std::size_t i : ia) {
    const double d = batch.at(i, k) - st.mean_a;
    st.within += d * d;
  }
  for (std::size_t i : ib) {
    const double d = batch.at(i, k) - st.mean_b;
    st.within += d * d;
  }
  return st;
}

double f_statistic_from_stats(const PairStats& st) {
  const double n_tilde = st.n_a + st.n_b - 2.0;
  const double grand = 0.5 * (st.mean_a + st.mean_b);
  const double da = st.mean_a - grand;
  const double db = st.mean_b - grand;
  const double between = st.n_a * da * da + st.n_b * db * db;
  return n_tilde * between / std::max(st.within, kWithinFloor);
}

void require_group(std::span<const std::size_t> idx, int label) {
  if (idx.size() < 2) {
    throw std::invalid_argument("f statistic: label " + std::to_string(label) +
                                " has fewer than two members");
  }
}

}  // namespace

double f_statistic_per_dim(const LabeledEmbeddingBatch& batch, int alpha, int beta, int k) {
  if (alpha == beta) throw std::invalid_argument("f statistic: labels must differ");
  if (k < 0 || k >= batch.dim) throw std::invalid_argument("f statistic: dimension out of range");
  const auto ia = batch.indices_of(alpha);
  const auto ib = batch.indices_of(beta);
  require_group(ia, alpha);
  require_group(ib, beta);
  return f_statistic_from_stats(pair_stats(batch, ia, ib, k));
}

double separation_probability(double s, double n_tilde) {
  if (!(n_tilde >= 1.0)) {
    throw std::domain_error("separation_probability: n_tilde must be >= 1");
  }
  return f_cdf(s, 1, n_tilde);
}

SeparationTable build_separation_table(const LabeledEmbeddingBatch& batch) {
  const auto labels = batch.distinct_labels();
  if (labels.size() < 2) {
    throw std::invalid_argument("separation table: need at least two distinct labels");
  }
  std::vector<std::vector<std::size_t>> groups;
  groups.reserve(labels.size());
  for (int l : labels) {
    groups.push_back(batch.indices_of(l));
    require_group(groups.back(), l);
  }

  SeparationTable table;
  table.dim = batch.dim;
  for (std::size_t a = 0; a < labels.size(); ++a) {
    for (std::size_t b = a + 1; b < labels.size(); ++b) {
      SeparationTable::PairRow row;
      row.label_a = labels[a];
      row.label_b = labels[b];
      row.n_tilde = static_cast<double>(groups[a].size() + groups[b].size()) - 2.0;
      row.s.resize(batch.dim);
      row.phi.resize(batch.dim);
      for (int k = 0; k < batch.dim; ++k) {
        const double s = f_statistic_from_stats(pair_stats(batch, groups[a], groups[b], k));
        row.s[k] = s;
        row.phi[k] = f_cdf(s, 1, row.n_tilde);
      }
      table.pairs.push_back(std::move(row));
    }
  }
  return table;
}

std::vector<int> select_dimensions(std::span<const double> phi_row, int d) {
  const int dim = static_cast<int>(phi_row.size());
  if (d < 1 || d > dim) {
    throw std::invalid_argument("select_dimensions: d must lie in [1, dim]");
  }
  std::vector<int> order(dim);
  std::iota(order.begin(), order.end(), 0);
  // larger phi first; equal phi keeps the lower index first
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return phi_row[i] > phi_row[j]; });
  order.resize(d);
  std::sort(order.begin(), order.end());
  return order;
}

namespace {

void check_config(const LabeledEmbeddingBatch& batch, const FLossConfig& cfg) {
  if (cfg.d < 1 || cfg.d > batch.dim) {
    throw std::invalid_argument("f_loss: config d must lie in [1, embedding dim]");
  }
  if (!(cfg.phi_floor > 0.0 && cfg.phi_floor < 1.0)) {
    throw std::invalid_argument("f_loss: phi_floor must lie in (0, 1)");
  }
}

}  // namespace

FLossEval f_loss_eval(const LabeledEmbeddingBatch& batch, const FLossConfig& cfg) {
  check_config(batch, cfg);
  FLossEval out;
  out.table = build_separation_table(batch);
  out.grad.assign(batch.size() * static_cast<std::size_t>(batch.dim), 0.0);

  for (const auto& row : out.table.pairs) {
    const auto ia = batch.indices_of(row.label_a);
    const auto ib = batch.indices_of(row.label_b);
    const auto selected = select_dimensions(row.phi, cfg.d);
    for (int k : selected) {
      const double phi_raw = row.phi[k];
      const double phi = std::clamp(phi_raw, cfg.phi_floor, 1.0);
      out.loss -= std::log(phi);
      out.min_selected_phi = std::min(out.min_selected_phi, phi);
      if (phi_raw <= cfg.phi_floor) continue;  // flat region of the clamped loss

      const PairStats st = pair_stats(batch, ia, ib, k);
      const double s = row.s[k];
      const double n_tilde = row.n_tilde;
      const double x = s / (s + n_tilde);
      // dL/ds = (-1/Phi) * I'(x; 1/2, n~/2) * dx/ds
      const double dphi_dx = reg_inc_beta_dx(x, BetaParams{0.5, 0.5 * n_tilde});
      const double dx_ds = n_tilde / ((s + n_tilde) * (s + n_tilde));
      const double dl_ds = -(1.0 / phi) * dphi_dx * dx_ds;

      // s = n~ * B / W with B = (n_a + n_b) Delta^2 / 4, Delta = mean_a - mean_b,
      // W = clamped within-class sum of squares.
      const double w_hat = std::max(st.within, kWithinFloor);
      const bool w_active = st.within > kWithinFloor;
      const double delta = st.mean_a - st.mean_b;
      const double n_sum = st.n_a + st.n_b;
      const double between = 0.25 * n_sum * delta * delta;
      const double db_dmean = 0.5 * n_sum * delta;  // dB/d(mean_a); negate for mean_b

      for (std::size_t i : ia) {
        const double db_dz = db_dmean / st.n_a;
        const double dw_dz = w_active ? 2.0 * (batch.at(i, k) - st.mean_a) : 0.0;
        const double ds_dz = n_tilde * (db_dz * w_hat - between * dw_dz) / (w_hat * w_hat);
        out.grad[i * static_cast<std::size_t>(batch.dim) + k] += dl_ds * ds_dz;
      }
      for (std::size_t i : ib) {
        const double db_dz = -db_dmean / st.n_b;
        const double dw_dz = w_active ? 2.0 * (batch.at(i, k) - st.mean_b) : 0.0;
        const double ds_dz = n_tilde * (db_dz * w_hat - between * dw_dz) / (w_hat * w_hat);
        out.grad[i * static_cast<std::size_t>(batch.dim) + k] += dl_ds * ds_dz;
      }
    }
  }
  return out;
}

double f_loss(const LabeledEmbeddingBatch& batch, const FLossConfig& cfg) {
  check_config(batch, cfg);
  const SeparationTable table = build_separation_table(batch);
  double loss = 0.0;
  for (const auto& row : table.pairs) {
    for (int k : select_dimensions(row.phi, cfg.d)) {
      loss -= std::log(std::clamp(row.phi[k], cfg.phi_floor, 1.0));
    }
  }
  return loss;
}

std::vector<double> f_loss_grad(const LabeledEmbeddingBatch& batch, const FLossConfig& cfg) {
  return f_loss_eval(batch, cfg).grad;
}

}  // namespace fse
