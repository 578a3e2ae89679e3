#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fstat/batch.hpp"

namespace fse {

// Discrete factor labels aligned with a set of instances: one integer column
// per factor.
struct FactorTable {
  std::vector<std::string> names;
  std::vector<std::vector<int>> columns;  // columns[f][i] = value of factor f for instance i

  std::size_t n_factors() const { return columns.size(); }
  std::size_t n_instances() const { return columns.empty() ? 0 : columns.front().size(); }
};

// Equal-width binning of one code dimension over [min, max] of the observed
// values; the top bin is right-inclusive. All-equal input maps to bin 0.
std::vector<int> discretize_code(std::span<const double> values, int bins = 20);

// Plug-in discrete mutual information in nats; 0 ln 0 := 0.
double mutual_information(std::span<const int> code_bins, std::span<const int> factor_values);

struct MutualInfoMatrix {
  int n_dims = 0;
  int n_factors = 0;
  std::vector<double> m;  // row-major (dim, factor)

  double at(int i, int f) const { return m[static_cast<std::size_t>(i) * n_factors + f]; }
  double& at(int i, int f) { return m[static_cast<std::size_t>(i) * n_factors + f]; }
};

struct ModularityScores {
  std::vector<double> per_dim;  // 1 - delta_i, in [0, 1]
  double mean = 0.0;
};

// Deviation-from-template modularity. For dimension i with theta_i = max_f m_if:
//   delta_i = sum_f (m_if - t_if)^2 / (theta_i^2 (N - 1)),  score_i = 1 - delta_i.
// A dimension with zero mutual information to every factor scores 0. Requires
// at least two factors.
ModularityScores modularity_score(const MutualInfoMatrix& m);

struct LogisticConfig {
  double l2 = 1e-4;
  int max_iters = 5000;
  double tol = 1e-8;        // on the change in regularized loss
  bool holdout = false;     // stratified 50/50 split instead of in-sample scoring
};

struct ExplicitnessResult {
  struct ValueAuc {
    int value = 0;
    double auc = 0.0;
  };
  std::vector<ValueAuc> per_value;
  double mean = 0.0;
  std::vector<int> skipped_values;  // values with < 2 instances
};

// One-vs-rest logistic regression on the full code for each represented value
// of one factor, scored by ROC AUC (rank-sum with midranks).
ExplicitnessResult explicitness_auc(std::span<const double> codes, int dim,
                                    std::span<const int> factor_values,
                                    const LogisticConfig& cfg = {});

// ROC AUC of raw scores via the Mann-Whitney rank-sum with average ranks.
double roc_auc(std::span<const double> scores, std::span<const int> positive);

// Fraction of queries whose k nearest references (L2) include a same-label
// reference.
double recall_at_k(const LabeledEmbeddingBatch& references,
                   const LabeledEmbeddingBatch& queries, int k);

// Leave-one-out variant for a single set serving as both references and
// queries.
double recall_at_k(const LabeledEmbeddingBatch& set, int k);

struct MetricsConfig {
  int bins = 20;
  LogisticConfig logistic;
};

struct DisentanglementReport {
  // absent when the factor table has a single factor (score undefined)
  std::optional<ModularityScores> modularity;
  struct FactorValueAuc {
    std::string factor;
    int value = 0;
    double auc = 0.0;
  };
  std::vector<FactorValueAuc> explicitness_per_value;
  double explicitness_mean = 0.0;
  std::optional<double> recall_at_1;
  std::vector<std::pair<std::string, std::string>> metadata;
};

// Full pipeline: per-dimension discretization, MI against every factor,
// modularity, and per-factor explicitness.
DisentanglementReport evaluate_disentanglement(std::span<const double> codes, int dim,
                                               const FactorTable& factors,
                                               const MetricsConfig& cfg = {});

}  // namespace fse
