#include "fstat/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "fstat/errors.hpp"

namespace fse {

std::vector<int> discretize_code(std::span<const double> values, int bins) {
  if (bins < 1) throw std::invalid_argument("discretize_code: bins must be >= 1");
  if (values.empty()) return {};
  double lo = values[0], hi = values[0];
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("discretize_code: non-finite value");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  std::vector<int> out(values.size(), 0);
  if (hi == lo) return out;  // degenerate range
  const double width = (hi - lo) / bins;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const int b = static_cast<int>((values[i] - lo) / width);
    out[i] = std::clamp(b, 0, bins - 1);
  }
  return out;
}

double mutual_information(std::span<const int> code_bins, std::span<const int> factor_values) {
  if (code_bins.size() != factor_values.size()) {
    throw shape_error("mutual_information: length mismatch");
  }
  if (code_bins.empty()) throw std::invalid_argument("mutual_information: empty input");

  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> pb, pv;
  const double inv_n = 1.0 / static_cast<double>(code_bins.size());
  for (std::size_t i = 0; i < code_bins.size(); ++i) {
    joint[{code_bins[i], factor_values[i]}] += inv_n;
    pb[code_bins[i]] += inv_n;
    pv[factor_values[i]] += inv_n;
  }
  double mi = 0.0;
  for (const auto& [cell, p] : joint) {
    if (p <= 0.0) continue;
    mi += p * std::log(p / (pb[cell.first] * pv[cell.second]));
  }
  return std::max(mi, 0.0);  // guard tiny negative round-off
}

ModularityScores modularity_score(const MutualInfoMatrix& m) {
  if (m.n_factors < 2) {
    throw std::invalid_argument("modularity_score: needs at least two factors");
  }
  if (m.n_dims < 1 || m.m.size() != static_cast<std::size_t>(m.n_dims) * m.n_factors) {
    throw shape_error("modularity_score: inconsistent matrix shape");
  }
  ModularityScores out;
  out.per_dim.reserve(m.n_dims);
  for (int i = 0; i < m.n_dims; ++i) {
    double theta = 0.0;
    int argmax = 0;
    for (int f = 0; f < m.n_factors; ++f) {
      if (m.at(i, f) < 0.0) throw std::invalid_argument("modularity_score: negative MI entry");
      if (m.at(i, f) > theta) {
        theta = m.at(i, f);
        argmax = f;
      }
    }
    if (theta <= 0.0) {
      out.per_dim.push_back(0.0);  // uninformative dimension
      continue;
    }
    double dev = 0.0;
    for (int f = 0; f < m.n_factors; ++f) {
      if (f == argmax) continue;
      dev += m.at(i, f) * m.at(i, f);
    }
    const double delta = dev / (theta * theta * (m.n_factors - 1));
    out.per_dim.push_back(1.0 - delta);
  }
  out.mean = std::accumulate(out.per_dim.begin(), out.per_dim.end(), 0.0) /
             static_cast<double>(out.per_dim.size());
  return out;
}

double roc_auc(std::span<const double> scores, std::span<const int> positive) {
  if (scores.size() != positive.size()) throw shape_error("roc_auc: length mismatch");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // average ranks over ties (1-based)
  std::vector<double> rank(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) rank[order[t]] = avg;
    i = j + 1;
  }

  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (positive[t]) {
      rank_sum += rank[t];
      ++n_pos;
    }
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  const double u = rank_sum - 0.5 * static_cast<double>(n_pos) * (n_pos + 1);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

namespace {

// Full-batch gradient descent on L2-regularized logistic loss. The step size
// is 1/L with L an upper bound on the gradient Lipschitz constant, so the
// iteration is monotone without a line search.
struct LogisticFit {
  std::vector<double> w;
  double b = 0.0;
};

LogisticFit fit_logistic(std::span<const double> x, int dim, std::span<const int> y,
                         const LogisticConfig& cfg) {
  const std::size_t n = y.size();
  LogisticFit fit;
  fit.w.assign(dim, 0.0);

  double sq_norm = 1.0 * n;  // bias column
  for (double v : x) sq_norm += v * v;
  const double lr = 1.0 / (0.25 * sq_norm / static_cast<double>(n) + cfg.l2);

  std::vector<double> margin(n), prob(n), gw(dim);
  double prev_loss = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double z = fit.b;
      const double* row = x.data() + i * dim;
      for (int k = 0; k < dim; ++k) z += fit.w[k] * row[k];
      margin[i] = z;
      prob[i] = 1.0 / (1.0 + std::exp(-z));
      // log(1 + exp(-|z|)) form avoids overflow
      loss += std::max(z, 0.0) - z * y[i] + std::log1p(std::exp(-std::fabs(z)));
    }
    loss /= static_cast<double>(n);
    for (int k = 0; k < dim; ++k) loss += 0.5 * cfg.l2 * fit.w[k] * fit.w[k];

    std::fill(gw.begin(), gw.end(), 0.0);
    double gb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = prob[i] - y[i];
      const double* row = x.data() + i * dim;
      for (int k = 0; k < dim; ++k) gw[k] += r * row[k];
      gb += r;
    }
    for (int k = 0; k < dim; ++k) {
      fit.w[k] -= lr * (gw[k] / static_cast<double>(n) + cfg.l2 * fit.w[k]);
    }
    fit.b -= lr * gb / static_cast<double>(n);

    if (std::fabs(prev_loss - loss) <= cfg.tol) break;
    prev_loss = loss;
  }
  return fit;
}

std::vector<double> logistic_scores(const LogisticFit& fit, std::span<const double> x, int dim) {
  const std::size_t n = x.size() / dim;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double z = fit.b;
    const double* row = x.data() + i * dim;
    for (int k = 0; k < dim; ++k) z += fit.w[k] * row[k];
    out[i] = z;
  }
  return out;
}

}  // namespace

ExplicitnessResult explicitness_auc(std::span<const double> codes, int dim,
                                    std::span<const int> factor_values,
                                    const LogisticConfig& cfg) {
  if (dim < 1) throw std::invalid_argument("explicitness_auc: dim must be >= 1");
  const std::size_t n = factor_values.size();
  if (codes.size() != n * static_cast<std::size_t>(dim)) {
    throw shape_error("explicitness_auc: codes do not match labels * dim");
  }

  std::map<int, int> counts;
  for (int v : factor_values) ++counts[v];
  if (counts.size() < 2) {
    throw std::invalid_argument("explicitness_auc: factor needs at least two represented values");
  }

  ExplicitnessResult out;
  for (const auto& [value, count] : counts) {
    if (count < 2) {
      out.skipped_values.push_back(value);
      continue;
    }
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = factor_values[i] == value ? 1 : 0;

    double auc;
    if (cfg.holdout) {
      // stratified 50/50 split by original order: even positions train, odd eval
      std::vector<double> x_train, x_eval;
      std::vector<int> y_train, y_eval;
      std::map<int, int> seen;
      for (std::size_t i = 0; i < n; ++i) {
        const bool train = (seen[y[i]]++ % 2) == 0;
        auto& xs = train ? x_train : x_eval;
        auto& ys = train ? y_train : y_eval;
        xs.insert(xs.end(), codes.begin() + i * dim, codes.begin() + (i + 1) * dim);
        ys.push_back(y[i]);
      }
      const LogisticFit fit = fit_logistic(x_train, dim, y_train, cfg);
      auc = roc_auc(logistic_scores(fit, x_eval, dim), y_eval);
    } else {
      const LogisticFit fit = fit_logistic(codes, dim, y, cfg);
      auc = roc_auc(logistic_scores(fit, codes, dim), y);
    }
    out.per_value.push_back({value, auc});
  }

  if (out.per_value.empty()) {
    throw std::invalid_argument("explicitness_auc: no factor value has two instances");
  }
  double sum = 0.0;
  for (const auto& v : out.per_value) sum += v.auc;
  out.mean = sum / static_cast<double>(out.per_value.size());
  return out;
}

namespace {

double recall_impl(const LabeledEmbeddingBatch& refs, const LabeledEmbeddingBatch& queries,
                   int k, bool leave_one_out) {
  if (k < 1) throw std::invalid_argument("recall_at_k: k must be >= 1");
  if (refs.size() == 0) throw std::invalid_argument("recall_at_k: empty reference set");
  if (refs.dim != queries.dim) throw shape_error("recall_at_k: dimension mismatch");
  if (leave_one_out && refs.size() < 2) {
    throw std::invalid_argument("recall_at_k: no eligible reference");
  }

  const std::size_t dim = static_cast<std::size_t>(refs.dim);
  std::size_t correct = 0;
  std::vector<std::pair<double, std::size_t>> dist;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const double* qp = queries.embeddings.data() + q * dim;
    if (k == 1) {
      // nearest neighbor, ties to the lower index
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_r = 0;
      for (std::size_t r = 0; r < refs.size(); ++r) {
        if (leave_one_out && r == q) continue;
        const double* rp = refs.embeddings.data() + r * dim;
        double acc = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
          const double diff = qp[d] - rp[d];
          acc += diff * diff;
        }
        if (acc < best) {
          best = acc;
          best_r = r;
        }
      }
      if (refs.labels[best_r] == queries.labels[q]) ++correct;
      continue;
    }
    dist.clear();
    for (std::size_t r = 0; r < refs.size(); ++r) {
      if (leave_one_out && r == q) continue;
      const double* rp = refs.embeddings.data() + r * dim;
      double acc = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = qp[d] - rp[d];
        acc += diff * diff;
      }
      dist.emplace_back(acc, r);
    }
    const std::size_t kk = std::min(static_cast<std::size_t>(k), dist.size());
    std::partial_sort(dist.begin(), dist.begin() + kk, dist.end());
    for (std::size_t t = 0; t < kk; ++t) {
      if (refs.labels[dist[t].second] == queries.labels[q]) {
        ++correct;
        break;
      }
    }
  }
  return static_cast<double>(correct) / static_cast<double>(queries.size());
}

}  // namespace

double recall_at_k(const LabeledEmbeddingBatch& references,
                   const LabeledEmbeddingBatch& queries, int k) {
  return recall_impl(references, queries, k, /*leave_one_out=*/false);
}

double recall_at_k(const LabeledEmbeddingBatch& set, int k) {
  return recall_impl(set, set, k, /*leave_one_out=*/true);
}

DisentanglementReport evaluate_disentanglement(std::span<const double> codes, int dim,
                                               const FactorTable& all_factors,
                                               const MetricsConfig& cfg) {
  const std::size_t n = all_factors.n_instances();
  if (codes.size() != n * static_cast<std::size_t>(dim)) {
    throw shape_error("evaluate_disentanglement: codes do not align with factor table");
  }

  // factors degenerate on this instance subset cannot be scored
  FactorTable factors;
  for (std::size_t f = 0; f < all_factors.n_factors(); ++f) {
    std::map<int, int> counts;
    for (int v : all_factors.columns[f]) ++counts[v];
    std::erase_if(counts, [](const auto& c) { return c.second < 2; });
    if (counts.size() < 2) continue;
    factors.names.push_back(all_factors.names[f]);
    factors.columns.push_back(all_factors.columns[f]);
  }
  if (factors.n_factors() == 0) {
    throw std::invalid_argument(
        "evaluate_disentanglement: no factor has two represented values");
  }

  // per-dimension bins, then MI against every factor
  MutualInfoMatrix mi;
  mi.n_dims = dim;
  mi.n_factors = static_cast<int>(factors.n_factors());
  mi.m.assign(static_cast<std::size_t>(dim) * mi.n_factors, 0.0);
  std::vector<double> column(n);
  for (int i = 0; i < dim; ++i) {
    for (std::size_t r = 0; r < n; ++r) column[r] = codes[r * dim + i];
    const std::vector<int> bins = discretize_code(column, cfg.bins);
    for (int f = 0; f < mi.n_factors; ++f) {
      mi.at(i, f) = mutual_information(bins, factors.columns[f]);
    }
  }

  DisentanglementReport report;
  if (mi.n_factors >= 2) report.modularity = modularity_score(mi);

  double auc_sum = 0.0;
  std::size_t auc_count = 0;
  for (std::size_t f = 0; f < factors.n_factors(); ++f) {
    const ExplicitnessResult res = explicitness_auc(codes, dim, factors.columns[f], cfg.logistic);
    for (const auto& v : res.per_value) {
      report.explicitness_per_value.push_back({factors.names[f], v.value, v.auc});
      auc_sum += v.auc;
      ++auc_count;
    }
  }
  report.explicitness_mean = auc_sum / static_cast<double>(auc_count);
  return report;
}

}  // namespace fse
