#include "fstat/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "fstat/errors.hpp"
#include "fstat/metrics.hpp"
#include "fstat/triplet.hpp"

namespace fse {

void TrainConfig::validate() const {
  if (max_epochs < 1) throw std::invalid_argument("train: max_epochs must be >= 1");
  if (patience < 1) throw std::invalid_argument("train: patience must be >= 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("train: learning_rate must be positive");
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw std::invalid_argument("train: val_fraction must lie in (0, 1)");
  }
  if (margin < 0.0) throw std::invalid_argument("train: margin must be >= 0");
}

std::vector<double> gather_observations(const FactorialDataset& dataset,
                                        std::span<const std::size_t> indices) {
  const std::size_t dim = static_cast<std::size_t>(dataset.spec.observation_dim);
  std::vector<double> out;
  out.reserve(indices.size() * dim);
  for (std::size_t i : indices) {
    const auto row = dataset.observation(i);
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

namespace {

// mean explicitness over the class-relevant factors of the validation split;
// factors with a degenerate value distribution in the split are skipped
double mean_explicitness(std::span<const double> codes, int dim, const FactorTable& factors) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t f = 0; f < factors.n_factors(); ++f) {
    std::map<int, int> counts;
    for (int v : factors.columns[f]) ++counts[v];
    std::erase_if(counts, [](const auto& c) { return c.second < 2; });
    if (counts.size() < 2) continue;
    const ExplicitnessResult res = explicitness_auc(codes, dim, factors.columns[f]);
    for (const auto& v : res.per_value) {
      sum += v.auc;
      ++count;
    }
  }
  if (count == 0) {
    throw std::invalid_argument("train: validation split supports no explicitness factor");
  }
  return sum / static_cast<double>(count);
}

double validation_metric(const EncoderModel& model, const FactorialDataset& dataset,
                         const TrainConfig& cfg, std::span<const std::size_t> val_indices,
                         const std::vector<int>& val_labels) {
  const auto obs = gather_observations(dataset, val_indices);
  auto codes = forward(model, obs, val_indices.size());
  if (cfg.val_metric == ValMetricKind::kRecallAt1) {
    LabeledEmbeddingBatch val_batch(model.embedding_dim(), std::move(codes), val_labels);
    return recall_at_k(val_batch, 1);
  }
  return mean_explicitness(codes, model.embedding_dim(), dataset.metric_factors(val_indices));
}

// The per-epoch explicitness signal fits one classifier per factor value; cap
// the instances it sees so large validation splits stay affordable. The cap
// is stratified by conjunction class and deterministic.
constexpr std::size_t kValMetricCap = 512;

std::vector<std::size_t> stratified_cap(std::span<const std::size_t> val_indices,
                                        const std::vector<int>& all_labels,
                                        std::size_t cap) {
  if (val_indices.size() <= cap) return {val_indices.begin(), val_indices.end()};
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i : val_indices) by_class[all_labels[i]].push_back(i);
  std::vector<std::size_t> out;
  for (std::size_t round = 0; out.size() < cap; ++round) {
    bool any = false;
    for (auto& [label, members] : by_class) {
      if (round < members.size() && out.size() < cap) {
        out.push_back(members[round]);
        any = true;
      }
    }
    if (!any) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

DatasetSplit split_by_conjunction(const FactorialDataset& dataset, double val_fraction,
                                  std::uint64_t seed) {
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw std::invalid_argument("split: val_fraction must lie in (0, 1)");
  }
  const auto labels = conjunction_labels(dataset);
  std::vector<int> classes(labels);
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  if (classes.size() < 3) {
    throw std::invalid_argument("split: need at least three conjunction classes");
  }
  Rng split_rng = Rng(seed).child(1);
  std::vector<int> class_order(classes);
  split_rng.shuffle(class_order);
  std::size_t n_val = static_cast<std::size_t>(
      std::llround(val_fraction * static_cast<double>(classes.size())));
  n_val = std::clamp<std::size_t>(n_val, 1, classes.size() - 2);
  std::vector<int> val_classes(class_order.begin(), class_order.begin() + n_val);
  std::sort(val_classes.begin(), val_classes.end());

  DatasetSplit split;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (std::binary_search(val_classes.begin(), val_classes.end(), labels[i])) {
      split.val_indices.push_back(i);
    } else {
      split.train_indices.push_back(i);
    }
  }
  return split;
}

TrainResult train(const EncoderModel& initial, const FactorialDataset& dataset,
                  const TrainConfig& cfg) {
  cfg.validate();
  initial.validate();
  if (initial.input_dim() != dataset.spec.observation_dim) {
    throw shape_error("train: encoder input dim does not match observation dim");
  }
  if (cfg.loss == LossKind::kFStat &&
      (cfg.floss.d < 1 || cfg.floss.d > initial.embedding_dim())) {
    throw std::invalid_argument("train: floss d must lie in [1, embedding dim]");
  }

  Rng root(cfg.seed);
  Rng epoch_rng = root.child(2);

  const auto labels = conjunction_labels(dataset);
  DatasetSplit split = split_by_conjunction(dataset, cfg.val_fraction, cfg.seed);

  TrainResult result;
  result.train_indices = std::move(split.train_indices);
  result.val_indices = std::move(split.val_indices);
  std::vector<std::size_t> metric_indices(result.val_indices);
  if (cfg.val_metric == ValMetricKind::kMeanExplicitness) {
    metric_indices = stratified_cap(result.val_indices, labels, kValMetricCap);
  }
  std::vector<int> val_labels;
  val_labels.reserve(metric_indices.size());
  for (std::size_t i : metric_indices) val_labels.push_back(labels[i]);

  EncoderModel model = initial;
  AdamState adam = AdamState::init(model, cfg.learning_rate);

  result.model = model;
  result.best_metric = validation_metric(model, dataset, cfg, metric_indices, val_labels);
  result.best_epoch = 0;

  int since_best = 0;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto episodes =
        cfg.oracle == OracleKind::kConjunction
            ? make_class_epoch(dataset, result.train_indices, cfg.episode, epoch_rng)
            : make_factor_epoch(dataset, result.train_indices, cfg.episode, epoch_rng);

    double loss_sum = 0.0;
    double min_phi = std::numeric_limits<double>::quiet_NaN();
    double grad_norm_sum = 0.0;
    for (const auto& ep : episodes) {
      const auto obs = gather_observations(dataset, ep.indices);
      auto codes = forward(model, obs, ep.size());
      for (double z : codes) {
        // 1e100 also guards the loss statistics against overflow
        if (!std::isfinite(z) || std::fabs(z) > 1e100) {
          throw train_error("train: embeddings diverged");
        }
      }
      LabeledEmbeddingBatch batch(model.embedding_dim(), std::move(codes), ep.labels);

      double loss;
      std::vector<double> egrad;
      if (cfg.loss == LossKind::kFStat) {
        FLossEval eval = f_loss_eval(batch, cfg.floss);
        loss = eval.loss;
        egrad = std::move(eval.grad);
        min_phi = std::isnan(min_phi) ? eval.min_selected_phi
                                      : std::min(min_phi, eval.min_selected_phi);
        double gmax = 0.0;
        for (double g : egrad) gmax = std::max(gmax, std::fabs(g));
        grad_norm_sum += gmax;
      } else {
        loss = triplet_loss(batch, cfg.margin);
        egrad = triplet_loss_grad(batch, cfg.margin);
      }
      if (!std::isfinite(loss)) throw train_error("train: loss diverged");
      loss_sum += loss;

      const ParamGrads grads = backward(model, obs, ep.size(), egrad);
      adam_step(model, grads, adam);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = episodes.empty() ? 0.0 : loss_sum / static_cast<double>(episodes.size());
    stats.min_selected_phi = min_phi;
    stats.grad_max_norm = cfg.loss == LossKind::kFStat && !episodes.empty()
                              ? grad_norm_sum / static_cast<double>(episodes.size())
                              : std::numeric_limits<double>::quiet_NaN();
    stats.val_metric = validation_metric(model, dataset, cfg, metric_indices, val_labels);
    result.log.push_back(stats);

    // ties keep the newer parameters (a saturated metric should not pin the
    // initial model) but only strict improvement resets the patience clock
    if (stats.val_metric >= result.best_metric) {
      const bool strict = stats.val_metric > result.best_metric;
      result.best_metric = stats.val_metric;
      result.best_epoch = epoch;
      result.model = model;
      result.improved = true;
      if (strict) {
        since_best = 0;
        continue;
      }
    }
    if (++since_best >= cfg.patience) break;
  }
  return result;
}

}  // namespace fse
