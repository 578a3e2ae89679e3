#pragma once

#include <cstdint>
#include <vector>

#include "fstat/encoder.hpp"
#include "fstat/floss.hpp"
#include "fstat/sampling.hpp"
#include "fstat/synthdata.hpp"

namespace fse {

enum class LossKind { kFStat, kTriplet };
enum class OracleKind { kConjunction, kFactor };
enum class ValMetricKind { kRecallAt1, kMeanExplicitness };

struct TrainConfig {
  LossKind loss = LossKind::kFStat;
  FLossConfig floss;
  double margin = 0.1;           // triplet only
  double learning_rate = 2e-4;
  OracleKind oracle = OracleKind::kConjunction;
  EpisodeConfig episode;
  ValMetricKind val_metric = ValMetricKind::kRecallAt1;
  int max_epochs = 200;
  int patience = 10;             // epochs without validation improvement
  double val_fraction = 0.5;     // fraction of conjunction classes held out
  std::uint64_t seed = 0;

  void validate() const;
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double val_metric = 0.0;
  // F-statistic loss diagnostics (NaN otherwise): smallest selected separation
  // probability over the epoch's episodes and pairs, and the epoch mean of the
  // per-episode embedding-gradient max-norm
  double min_selected_phi = 0.0;
  double grad_max_norm = 0.0;
};

struct TrainResult {
  EncoderModel model;  // parameters of the best validation epoch
  std::vector<EpochStats> log;
  int best_epoch = 0;  // 0 means the initial parameters were never beaten
  double best_metric = 0.0;
  bool improved = false;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> val_indices;
};

// Episodic training with early stopping. The train/validation split is
// disjoint on conjunction classes; all randomness derives from cfg.seed, so
// identical configurations produce identical results bit for bit.
TrainResult train(const EncoderModel& initial, const FactorialDataset& dataset,
                  const TrainConfig& cfg);

struct DatasetSplit {
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> val_indices;
};

// Deterministic split holding out a fraction of the conjunction classes;
// train() and the evaluation tooling share this so held-out instances agree.
DatasetSplit split_by_conjunction(const FactorialDataset& dataset, double val_fraction,
                                  std::uint64_t seed);

// Observations of the selected instances, stacked row-major.
std::vector<double> gather_observations(const FactorialDataset& dataset,
                                        std::span<const std::size_t> indices);

}  // namespace fse
