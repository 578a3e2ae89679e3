#pragma once

#include <span>
#include <vector>

#include "fstat/batch.hpp"

namespace fse {

struct FLossConfig {
  int d = 2;                // dimensions to separate per class pair
  double phi_floor = 1e-12; // Phi is clamped into [phi_floor, 1] before the log
};

// Per-(class-pair, dimension) F statistics and separation probabilities.
struct SeparationTable {
  struct PairRow {
    int label_a = 0;
    int label_b = 0;
    double n_tilde = 0.0;   // n_a + n_b - 2
    std::vector<double> s;  // F statistic per dimension
    std::vector<double> phi;
  };
  int dim = 0;
  std::vector<PairRow> pairs;  // unordered pairs, (label_a < label_b), lexicographic
};

// One-dimensional two-class F statistic on dimension k, restricted to the
// instances of labels alpha and beta:
//   s = n~ * sum_i n_i (zbar_i - zbarbar)^2 / sum_ij (z_ij - zbar_i)^2
// with zbarbar the unweighted mean of the two class means and the denominator
// clamped below at 1e-12.
double f_statistic_per_dim(const LabeledEmbeddingBatch& batch, int alpha, int beta, int k);

// Phi = Pr(S < s) under the equal-means null, i.e. the F(1, n~) CDF at s.
double separation_probability(double s, double n_tilde);

SeparationTable build_separation_table(const LabeledEmbeddingBatch& batch);

// Indices of the d largest Phi values, ties broken toward the lower index.
// Returned ascending. Selection carries no gradient.
std::vector<int> select_dimensions(std::span<const double> phi_row, int d);

// L_F = - sum over class pairs, sum over that pair's selected dimensions, of
// ln max(Phi, phi_floor). Pair contributions are accumulated in pair
// enumeration order so results are bitwise reproducible.
double f_loss(const LabeledEmbeddingBatch& batch, const FLossConfig& cfg);

// Analytic d L_F / d z, flat row-major (batch.size() x batch.dim). Dimensions
// outside every pair's selected set receive zero gradient from that pair;
// clamped Phi values contribute none (the clamped loss is locally constant).
std::vector<double> f_loss_grad(const LabeledEmbeddingBatch& batch, const FLossConfig& cfg);

// Loss, gradient and the separation table from one pass; also reports the
// smallest Phi among selected dimensions, the quantity whose approach to 1
// signals that every pair is reliably separated.
struct FLossEval {
  double loss = 0.0;
  std::vector<double> grad;
  SeparationTable table;
  double min_selected_phi = 1.0;
};
FLossEval f_loss_eval(const LabeledEmbeddingBatch& batch, const FLossConfig& cfg);

}  // namespace fse
