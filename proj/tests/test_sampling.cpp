#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <string>

#include "fstat/rng.hpp"
#include "fstat/sampling.hpp"
#include "fstat/synthdata.hpp"

using namespace fse;

namespace {

FactorialDataset make_dataset(std::vector<Factor> factors, int ipc, std::uint64_t seed) {
  FactorSpec spec;
  spec.factors = std::move(factors);
  spec.instances_per_combination = ipc;
  spec.observation_dim = spec.one_hot_width();
  spec.observation_noise_sd = 0.0;
  spec.mixing_seed = seed;
  fse::Rng rng(seed);
  return generate_factorial(spec, rng);
}

std::map<int, int> label_counts(const Episode& ep) {
  std::map<int, int> counts;
  for (int l : ep.labels) ++counts[l];
  return counts;
}

}  // namespace

TEST_CASE("conjunction_labels combine class factors and ignore noise") {
  const auto ds = make_dataset({{"a", 2, FactorRole::kClassRelevant},
                                {"b", 2, FactorRole::kClassRelevant},
                                {"c", 2, FactorRole::kClassRelevant},
                                {"noise", 3, FactorRole::kNoise}},
                               2, 11);
  const auto labels = conjunction_labels(ds);
  std::set<int> distinct(labels.begin(), labels.end());
  CHECK(distinct.size() == 8);
  // same class factors, different noise value: same label
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = i + 1; j < ds.size(); ++j) {
      const bool same_class = ds.value(i, 0) == ds.value(j, 0) &&
                              ds.value(i, 1) == ds.value(j, 1) &&
                              ds.value(i, 2) == ds.value(j, 2);
      CHECK((labels[i] == labels[j]) == same_class);
    }
  }
}

TEST_CASE("sample_class_episode takes all classes when few, caps members") {
  const auto ds = make_dataset({{"cls", 3, FactorRole::kClassRelevant}}, 20, 13);
  fse::Rng rng(1);
  const Episode ep = sample_class_episode(ds, 12, 10, rng);
  const auto counts = label_counts(ep);
  CHECK(counts.size() == 3);
  for (const auto& [label, count] : counts) CHECK(count == 10);
  CHECK(ep.oracle == Episode::Oracle::kClass);
  CHECK(ep.factor_index == -1);

  fse::Rng rng2(2);
  const Episode tight = sample_class_episode(ds, 12, 2, rng2);
  for (const auto& [label, count] : label_counts(tight)) CHECK(count == 2);
}

TEST_CASE("sample_class_episode is deterministic and errors on degenerate data") {
  const auto ds = make_dataset({{"cls", 4, FactorRole::kClassRelevant}}, 6, 17);
  fse::Rng r1(99), r2(99);
  const Episode e1 = sample_class_episode(ds, 3, 4, r1);
  const Episode e2 = sample_class_episode(ds, 3, 4, r2);
  CHECK(e1.indices == e2.indices);
  CHECK(e1.labels == e2.labels);

  const auto lone = make_dataset({{"cls", 2, FactorRole::kClassRelevant}}, 1, 19);
  fse::Rng r3(1);
  CHECK_THROWS_AS(sample_class_episode(lone, 12, 10, r3), std::invalid_argument);
}

TEST_CASE("sample_factor_episode cycles factors round-robin") {
  std::vector<Factor> seven;
  for (int i = 0; i < 7; ++i) {
    seven.push_back({"f" + std::to_string(i), 2, FactorRole::kClassRelevant});
  }
  const auto ds = make_dataset(seven, 1, 23);
  fse::Rng rng(3);
  for (int call = 0; call < 15; ++call) {
    const Episode ep = sample_factor_episode(ds, call, 12, 5, rng);
    CHECK(ep.oracle == Episode::Oracle::kFactor);
    CHECK(ep.factor_index == call % 7);
  }
}

TEST_CASE("factor episodes respect value caps and hide nothing but the factor id") {
  const auto ds = make_dataset({{"bin", 2, FactorRole::kClassRelevant},
                                {"many", 4, FactorRole::kClassRelevant}},
                               20, 29);
  fse::Rng rng(5);
  const Episode ep = sample_factor_episode(ds, 0, 12, 5, rng);
  CHECK(ep.factor_index == 0);
  const auto counts = label_counts(ep);
  CHECK(counts.size() == 2);
  for (const auto& [value, count] : counts) {
    CHECK(count <= 5);
    CHECK(count >= 2);
  }
  // labels are the factor's values on the selected instances
  for (std::size_t i = 0; i < ep.size(); ++i) {
    CHECK(ep.labels[i] == ds.value(ep.indices[i], 0));
  }

  fse::Rng r2(7), r3(7);
  const Episode a = sample_factor_episode(ds, 1, 3, 4, r2);
  const Episode b = sample_factor_episode(ds, 1, 3, 4, r3);
  CHECK(a.indices == b.indices);
  CHECK(a.factor_index == 1);
  const auto many_counts = label_counts(a);
  CHECK(many_counts.size() == 3);  // capped at max_values
}

TEST_CASE("factor episodes skip degenerate factors within the pool") {
  const auto ds = make_dataset({{"a", 2, FactorRole::kClassRelevant},
                                {"b", 2, FactorRole::kClassRelevant}},
                               4, 31);
  // pool restricted to instances with a == 0: factor a is degenerate there
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.value(i, 0) == 0) pool.push_back(i);
  }
  fse::Rng rng(9);
  const Episode ep = sample_factor_episode(ds, 0, 12, 10, rng);
  CHECK(ep.factor_index == 0);
  const Episode skipped = sample_factor_episode(ds, pool, 0, 12, 10, rng);
  CHECK(skipped.factor_index == 1);  // cycled past the degenerate factor
}

TEST_CASE("class epoch partitions the pool and respects caps") {
  const auto ds = make_dataset({{"cls", 5, FactorRole::kClassRelevant}}, 24, 37);
  std::vector<std::size_t> pool(ds.size());
  for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;

  EpisodeConfig cfg;
  cfg.max_labels = 3;
  cfg.max_per_label = 10;
  fse::Rng rng(11);
  const auto epoch = make_class_epoch(ds, pool, cfg, rng);

  std::set<std::size_t> seen;
  for (const auto& ep : epoch) {
    const auto counts = label_counts(ep);
    CHECK(counts.size() >= 2);
    CHECK(static_cast<int>(counts.size()) <= cfg.max_labels);
    for (const auto& [label, count] : counts) {
      CHECK(count >= 2);
      CHECK(count <= cfg.max_per_label);
    }
    for (std::size_t i : ep.indices) CHECK(seen.insert(i).second);  // no repeats
  }
  CHECK(seen.size() == ds.size());  // full coverage
}

TEST_CASE("factor epoch covers every instance for every factor, round-robin") {
  const auto ds = make_dataset({{"a", 2, FactorRole::kClassRelevant},
                                {"b", 2, FactorRole::kClassRelevant},
                                {"c", 2, FactorRole::kClassRelevant},
                                {"noise", 2, FactorRole::kNoise}},
                               6, 41);
  std::vector<std::size_t> pool(ds.size());
  for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;

  EpisodeConfig cfg;
  cfg.max_labels = 12;
  cfg.max_per_label = 5;
  fse::Rng rng(13);
  const auto epoch = make_factor_epoch(ds, pool, cfg, rng);

  std::map<int, int> episodes_per_factor;
  std::map<int, std::set<std::size_t>> covered;
  for (const auto& ep : epoch) {
    CHECK(ep.oracle == Episode::Oracle::kFactor);
    CHECK(ep.factor_index != 3);  // the noise factor never drives an episode
    ++episodes_per_factor[ep.factor_index];
    for (std::size_t i = 0; i < ep.size(); ++i) {
      CHECK(ep.labels[i] == ds.value(ep.indices[i], ep.factor_index));
      CHECK(covered[ep.factor_index].insert(ep.indices[i]).second);
    }
    for (const auto& [value, count] : label_counts(ep)) {
      CHECK(count >= 2);
      CHECK(count <= cfg.max_per_label);
    }
  }
  // equal-cardinality factors: equal episode counts, every instance once each
  REQUIRE(episodes_per_factor.size() == 3);
  int lo = 1 << 30, hi = 0;
  for (const auto& [factor, count] : episodes_per_factor) {
    lo = std::min(lo, count);
    hi = std::max(hi, count);
    CHECK(covered[factor].size() == ds.size());
  }
  CHECK(hi - lo <= 1);

  // interleaving: the first episodes of the epoch walk distinct factors
  REQUIRE(epoch.size() >= 3);
  CHECK(epoch[0].factor_index != epoch[1].factor_index);
  CHECK(epoch[1].factor_index != epoch[2].factor_index);
}
