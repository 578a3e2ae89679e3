#pragma once

#include <span>
#include <vector>

#include "fstat/rng.hpp"
#include "fstat/synthdata.hpp"

namespace fse {

// One minibatch assembled by an oracle: dataset instance indices plus the
// opaque grouping labels a loss separates on. For factor episodes the hidden
// factor index is recorded as provenance; no loss may consume it.
struct Episode {
  enum class Oracle { kClass, kFactor };

  std::vector<std::size_t> indices;
  std::vector<int> labels;  // parallel to indices
  Oracle oracle = Oracle::kClass;
  int factor_index = -1;    // provenance, factor episodes only

  std::size_t size() const { return indices.size(); }
};

struct EpisodeConfig {
  int max_labels = 12;
  int max_per_label = 10;
};

// Class label per instance: the conjunction of the instance's values on all
// class-relevant factors. Distinct tuples map to distinct dense ids.
std::vector<int> conjunction_labels(const FactorialDataset& dataset);

// Up to max_labels classes sampled uniformly without replacement, then up to
// max_per_label instances per class without replacement. Classes left with a
// single eligible instance are dropped.
Episode sample_class_episode(const FactorialDataset& dataset,
                             std::span<const std::size_t> pool, int max_labels,
                             int max_per_label, Rng& rng);
Episode sample_class_episode(const FactorialDataset& dataset, int max_labels,
                             int max_per_label, Rng& rng);

// Episode whose labels are the values of one class-relevant factor, chosen by
// round-robin over cycle_position. Factors with fewer than two represented
// values in the pool are skipped; if every factor is degenerate this throws.
Episode sample_factor_episode(const FactorialDataset& dataset,
                              std::span<const std::size_t> pool, int cycle_position,
                              int max_values, int max_per_value, Rng& rng);
Episode sample_factor_episode(const FactorialDataset& dataset, int cycle_position,
                              int max_values, int max_per_value, Rng& rng);

// One epoch of class episodes: every pool instance appears exactly once.
// Per-class shuffled queues are drained into episodes of at most max_labels
// classes and max_per_label instances each.
std::vector<Episode> make_class_epoch(const FactorialDataset& dataset,
                                      std::span<const std::size_t> pool,
                                      const EpisodeConfig& cfg, Rng& rng);

// One epoch of factor episodes: for every class-relevant factor, a shuffled
// partition of the pool (each instance once per factor), with the per-factor
// episode queues interleaved round-robin.
std::vector<Episode> make_factor_epoch(const FactorialDataset& dataset,
                                       std::span<const std::size_t> pool,
                                       const EpisodeConfig& cfg, Rng& rng);

}  // namespace fse
