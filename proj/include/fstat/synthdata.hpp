#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fstat/metrics.hpp"
#include "fstat/rng.hpp"

namespace fse {

enum class FactorRole { kClassRelevant, kNoise };

struct Factor {
  std::string name;
  int value_count = 2;
  FactorRole role = FactorRole::kClassRelevant;
};

struct FactorSpec {
  std::vector<Factor> factors;
  int instances_per_combination = 1;
  int observation_dim = 0;
  double observation_noise_sd = 0.0;
  std::uint64_t mixing_seed = 0;

  void validate() const;
  int one_hot_width() const;
  long long combination_count() const;
};

// Fully crossed factorial dataset: every factor-value combination appears
// exactly instances_per_combination times. Observations are a fixed random
// nonlinear mixing of the one-hot factor encoding (linear map, tanh, second
// linear map) plus Gaussian noise; the mixing is a function of mixing_seed
// alone, so the factors stay recoverable in principle.
struct FactorialDataset {
  FactorSpec spec;
  std::vector<double> observations;  // row-major, n x observation_dim
  std::vector<int> factor_values;    // row-major, n x n_factors

  std::size_t size() const {
    return spec.factors.empty() ? 0 : factor_values.size() / spec.factors.size();
  }
  int n_factors() const { return static_cast<int>(spec.factors.size()); }
  int value(std::size_t i, int f) const {
    return factor_values[i * spec.factors.size() + static_cast<std::size_t>(f)];
  }
  std::span<const double> observation(std::size_t i) const {
    return {observations.data() + i * static_cast<std::size_t>(spec.observation_dim),
            static_cast<std::size_t>(spec.observation_dim)};
  }

  std::vector<int> class_relevant_factors() const;

  // Factor columns for the metrics pipeline; noise factors excluded by default.
  FactorTable metric_factors(bool include_noise = false) const;
  FactorTable metric_factors(std::span<const std::size_t> subset,
                             bool include_noise = false) const;
};

FactorialDataset generate_factorial(const FactorSpec& spec, Rng& rng);

// One of the sixteen reference code layouts used to sanity-check the
// disentanglement metrics: patterns a-h are clean, i-p are the same shapes
// with heavy intrinsic cluster noise. Each is four clusters of 2-D points
// carrying one or two binary/quaternary factors.
struct GoldenCode {
  char pattern = 'a';
  std::vector<double> points;  // row-major, n x 2
  FactorTable factors;
  // reference flags for this layout; in XOR layouts flag_explicit refers to
  // the linearly recoverable factor only
  bool flag_modular = false;
  bool flag_explicit = false;
  int entangled_factor = -1;        // XOR-labeled factor, unrecoverable linearly
  int separable_factor = -1;        // its linearly recoverable companion

  std::size_t size() const { return points.size() / 2; }
};

GoldenCode generate_golden_code(char pattern, int points_per_cluster, double jitter_sd,
                                Rng& rng);

}  // namespace fse
