#include "fstat/sampling.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace fse {

namespace {

std::vector<std::size_t> full_pool(const FactorialDataset& dataset) {
  std::vector<std::size_t> pool(dataset.size());
  for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
  return pool;
}

using LabelGroups = std::vector<std::pair<int, std::vector<std::size_t>>>;

// pool indices grouped by label, labels ascending, singleton groups dropped
LabelGroups group_by(std::span<const std::size_t> pool,
                     const std::vector<int>& labels_by_instance) {
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i : pool) groups[labels_by_instance[i]].push_back(i);
  std::erase_if(groups, [](const auto& g) { return g.second.size() < 2; });
  return {groups.begin(), groups.end()};
}

// Drain shuffled label groups into episodes of at most max_labels groups and
// max_per_label instances per group, so that every instance is used at most
// once and almost always exactly once (an odd leftover can only be stranded
// when max_per_label == 2). Chunks never leave a remainder of exactly one.
std::vector<Episode> drain_groups(LabelGroups& groups, const EpisodeConfig& cfg,
                                  Episode::Oracle oracle, int factor_index, Rng& rng) {
  for (auto& [label, members] : groups) rng.shuffle(members);

  std::vector<std::size_t> cursor(groups.size(), 0);
  std::vector<Episode> epoch;
  std::size_t rotor = 0;
  for (;;) {
    Episode ep;
    ep.oracle = oracle;
    ep.factor_index = factor_index;
    int used_labels = 0;
    for (std::size_t step = 0; step < groups.size() && used_labels < cfg.max_labels; ++step) {
      const std::size_t g = (rotor + step) % groups.size();
      const auto& members = groups[g].second;
      std::size_t left = members.size() - cursor[g];
      if (left == 1) {
        cursor[g] = members.size();  // unpairable leftover
        continue;
      }
      if (left == 0) continue;
      std::size_t take = std::min<std::size_t>(left, cfg.max_per_label);
      if (left - take == 1 && take >= 3) --take;
      for (std::size_t t = 0; t < take; ++t) {
        ep.indices.push_back(members[cursor[g] + t]);
        ep.labels.push_back(groups[g].first);
      }
      cursor[g] += take;
      ++used_labels;
    }
    if (used_labels < 2) break;  // nothing pairable remains
    epoch.push_back(std::move(ep));
    rotor = (rotor + cfg.max_labels) % groups.size();
  }
  return epoch;
}

}  // namespace

std::vector<int> conjunction_labels(const FactorialDataset& dataset) {
  const auto class_factors = dataset.class_relevant_factors();
  if (class_factors.empty()) {
    throw std::invalid_argument("conjunction_labels: no class-relevant factor");
  }
  std::vector<int> labels(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    int id = 0;
    for (int f : class_factors) {
      id = id * dataset.spec.factors[f].value_count + dataset.value(i, f);
    }
    labels[i] = id;
  }
  return labels;
}

Episode sample_class_episode(const FactorialDataset& dataset,
                             std::span<const std::size_t> pool, int max_labels,
                             int max_per_label, Rng& rng) {
  if (max_labels < 2 || max_per_label < 2) {
    throw std::invalid_argument("class episode: max_labels and max_per_label must be >= 2");
  }
  const auto labels = conjunction_labels(dataset);
  auto groups = group_by(pool, labels);
  if (groups.size() < 2) {
    throw std::invalid_argument("class episode: fewer than two classes with two instances");
  }

  std::vector<std::size_t> class_order(groups.size());
  for (std::size_t i = 0; i < class_order.size(); ++i) class_order[i] = i;
  rng.shuffle(class_order);
  class_order.resize(std::min<std::size_t>(class_order.size(), max_labels));
  std::sort(class_order.begin(), class_order.end());

  Episode ep;
  ep.oracle = Episode::Oracle::kClass;
  for (std::size_t g : class_order) {
    auto members = groups[g].second;
    rng.shuffle(members);
    members.resize(std::min<std::size_t>(members.size(), max_per_label));
    for (std::size_t i : members) {
      ep.indices.push_back(i);
      ep.labels.push_back(groups[g].first);
    }
  }
  return ep;
}

Episode sample_class_episode(const FactorialDataset& dataset, int max_labels,
                             int max_per_label, Rng& rng) {
  return sample_class_episode(dataset, full_pool(dataset), max_labels, max_per_label, rng);
}

Episode sample_factor_episode(const FactorialDataset& dataset,
                              std::span<const std::size_t> pool, int cycle_position,
                              int max_values, int max_per_value, Rng& rng) {
  if (max_values < 2 || max_per_value < 2) {
    throw std::invalid_argument("factor episode: max_values and max_per_value must be >= 2");
  }
  if (cycle_position < 0) throw std::invalid_argument("factor episode: negative cycle position");
  const auto factors = dataset.class_relevant_factors();
  if (factors.empty()) throw std::invalid_argument("factor episode: no class-relevant factor");

  for (std::size_t attempt = 0; attempt < factors.size(); ++attempt) {
    const int f = factors[(static_cast<std::size_t>(cycle_position) + attempt) % factors.size()];
    std::vector<int> values(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) values[i] = dataset.value(i, f);
    auto by_value = group_by(pool, values);
    if (by_value.size() < 2) continue;  // degenerate factor in this pool, try the next

    std::vector<std::size_t> value_order(by_value.size());
    for (std::size_t i = 0; i < value_order.size(); ++i) value_order[i] = i;
    if (static_cast<int>(value_order.size()) > max_values) {
      rng.shuffle(value_order);
      value_order.resize(max_values);
      std::sort(value_order.begin(), value_order.end());
    }

    Episode ep;
    ep.oracle = Episode::Oracle::kFactor;
    ep.factor_index = f;
    for (std::size_t g : value_order) {
      auto members = by_value[g].second;
      rng.shuffle(members);
      members.resize(std::min<std::size_t>(members.size(), max_per_value));
      for (std::size_t i : members) {
        ep.indices.push_back(i);
        ep.labels.push_back(by_value[g].first);
      }
    }
    return ep;
  }
  throw std::invalid_argument("factor episode: every factor has fewer than two represented values");
}

Episode sample_factor_episode(const FactorialDataset& dataset, int cycle_position,
                              int max_values, int max_per_value, Rng& rng) {
  return sample_factor_episode(dataset, full_pool(dataset), cycle_position, max_values,
                               max_per_value, rng);
}

std::vector<Episode> make_class_epoch(const FactorialDataset& dataset,
                                      std::span<const std::size_t> pool,
                                      const EpisodeConfig& cfg, Rng& rng) {
  if (cfg.max_labels < 2 || cfg.max_per_label < 2) {
    throw std::invalid_argument("class epoch: max_labels and max_per_label must be >= 2");
  }
  const auto labels = conjunction_labels(dataset);
  auto groups = group_by(pool, labels);
  if (groups.size() < 2) {
    throw std::invalid_argument("class epoch: fewer than two classes with two instances");
  }
  return drain_groups(groups, cfg, Episode::Oracle::kClass, -1, rng);
}

std::vector<Episode> make_factor_epoch(const FactorialDataset& dataset,
                                       std::span<const std::size_t> pool,
                                       const EpisodeConfig& cfg, Rng& rng) {
  if (cfg.max_labels < 2 || cfg.max_per_label < 2) {
    throw std::invalid_argument("factor epoch: max_labels and max_per_label must be >= 2");
  }
  const auto factors = dataset.class_relevant_factors();
  if (factors.empty()) throw std::invalid_argument("factor epoch: no class-relevant factor");

  std::vector<std::vector<Episode>> queues;
  for (int f : factors) {
    std::vector<int> values(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) values[i] = dataset.value(i, f);
    auto by_value = group_by(pool, values);
    if (by_value.size() < 2) continue;
    auto queue = drain_groups(by_value, cfg, Episode::Oracle::kFactor, f, rng);
    if (!queue.empty()) queues.push_back(std::move(queue));
  }
  if (queues.empty()) {
    throw std::invalid_argument("factor epoch: every factor is degenerate in this pool");
  }

  // interleave: factor 0 episode, factor 1 episode, ... until all queues drain
  std::vector<Episode> epoch;
  for (std::size_t round = 0;; ++round) {
    bool any = false;
    for (auto& queue : queues) {
      if (round < queue.size()) {
        epoch.push_back(std::move(queue[round]));
        any = true;
      }
    }
    if (!any) break;
  }
  return epoch;
}

}  // namespace fse
