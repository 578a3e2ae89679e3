#include "fstat/synthdata.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fse {

namespace {

constexpr long long kMaxInstances = 50'000'000;

// intrinsic cluster noise of the "noisy" layouts i-p, relative to unit spacing
constexpr double kNoisyPatternSd = 0.55;

}  // namespace

void FactorSpec::validate() const {
  if (factors.empty()) throw std::invalid_argument("factor spec: needs at least one factor");
  for (const auto& f : factors) {
    if (f.value_count < 2) {
      throw std::invalid_argument("factor spec: factor '" + f.name +
                                  "' must have at least two values");
    }
    if (f.name.empty()) throw std::invalid_argument("factor spec: factor with empty name");
  }
  if (instances_per_combination < 1) {
    throw std::invalid_argument("factor spec: instances_per_combination must be >= 1");
  }
  if (observation_dim < one_hot_width()) {
    throw std::invalid_argument("factor spec: observation_dim must be >= total one-hot width");
  }
  if (observation_noise_sd < 0.0) {
    throw std::invalid_argument("factor spec: observation_noise_sd must be >= 0");
  }
  const long long total = combination_count() * instances_per_combination;
  if (total > kMaxInstances) {
    throw std::invalid_argument("factor spec: " + std::to_string(total) +
                                " instances exceeds the size guard");
  }
}

int FactorSpec::one_hot_width() const {
  int w = 0;
  for (const auto& f : factors) w += f.value_count;
  return w;
}

long long FactorSpec::combination_count() const {
  long long c = 1;
  for (const auto& f : factors) {
    c *= f.value_count;
    if (c > kMaxInstances) return c;
  }
  return c;
}

std::vector<int> FactorialDataset::class_relevant_factors() const {
  std::vector<int> out;
  for (int f = 0; f < n_factors(); ++f) {
    if (spec.factors[f].role == FactorRole::kClassRelevant) out.push_back(f);
  }
  return out;
}

FactorTable FactorialDataset::metric_factors(bool include_noise) const {
  std::vector<std::size_t> all(size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return metric_factors(all, include_noise);
}

FactorTable FactorialDataset::metric_factors(std::span<const std::size_t> subset,
                                             bool include_noise) const {
  FactorTable table;
  for (int f = 0; f < n_factors(); ++f) {
    if (!include_noise && spec.factors[f].role == FactorRole::kNoise) continue;
    table.names.push_back(spec.factors[f].name);
    std::vector<int> col;
    col.reserve(subset.size());
    for (std::size_t i : subset) col.push_back(value(i, f));
    table.columns.push_back(std::move(col));
  }
  return table;
}

FactorialDataset generate_factorial(const FactorSpec& spec, Rng& rng) {
  spec.validate();

  const int n_factors = static_cast<int>(spec.factors.size());
  const int onehot = spec.one_hot_width();
  const int hidden = spec.observation_dim;
  const int obs_dim = spec.observation_dim;

  // mixing weights depend only on the mixing seed
  Rng mix_rng(spec.mixing_seed);
  std::vector<double> w1(static_cast<std::size_t>(hidden) * onehot);
  std::vector<double> w2(static_cast<std::size_t>(obs_dim) * hidden);
  for (double& v : w1) v = mix_rng.normal();
  const double w2_scale = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (double& v : w2) v = mix_rng.normal() * w2_scale;

  FactorialDataset ds;
  ds.spec = spec;
  const std::size_t total =
      static_cast<std::size_t>(spec.combination_count()) * spec.instances_per_combination;
  ds.observations.reserve(total * obs_dim);
  ds.factor_values.reserve(total * n_factors);

  std::vector<int> combo(n_factors, 0);
  std::vector<double> onehot_vec(onehot), hidden_vec(hidden), obs(obs_dim);
  bool done = false;
  while (!done) {
    // one-hot encode the current combination
    std::fill(onehot_vec.begin(), onehot_vec.end(), 0.0);
    int offset = 0;
    for (int f = 0; f < n_factors; ++f) {
      onehot_vec[offset + combo[f]] = 1.0;
      offset += spec.factors[f].value_count;
    }
    for (int h = 0; h < hidden; ++h) {
      double acc = 0.0;
      const double* row = w1.data() + static_cast<std::size_t>(h) * onehot;
      for (int j = 0; j < onehot; ++j) acc += row[j] * onehot_vec[j];
      hidden_vec[h] = std::tanh(acc);
    }
    for (int o = 0; o < obs_dim; ++o) {
      double acc = 0.0;
      const double* row = w2.data() + static_cast<std::size_t>(o) * hidden;
      for (int h = 0; h < hidden; ++h) acc += row[h] * hidden_vec[h];
      obs[o] = acc;
    }

    for (int rep = 0; rep < spec.instances_per_combination; ++rep) {
      for (int o = 0; o < obs_dim; ++o) {
        const double noise =
            spec.observation_noise_sd > 0.0 ? rng.normal(0.0, spec.observation_noise_sd) : 0.0;
        ds.observations.push_back(obs[o] + noise);
      }
      ds.factor_values.insert(ds.factor_values.end(), combo.begin(), combo.end());
    }

    // advance the mixed-radix counter
    done = true;
    for (int f = n_factors - 1; f >= 0; --f) {
      if (++combo[f] < spec.factors[f].value_count) {
        done = false;
        break;
      }
      combo[f] = 0;
    }
  }
  return ds;
}

namespace {

enum class Layout { kGrid, kDiamond, kHLine, kDLine };

struct PatternDef {
  Layout layout;
  bool two_factor;   // false: one quaternary factor
  bool xor_labels;   // two-factor layouts only
  bool noisy;
  bool flag_modular;
  bool flag_explicit;
};

PatternDef pattern_def(char pattern) {
  switch (pattern) {
    case 'a': return {Layout::kGrid,    true,  false, false, true,  true};
    case 'b': return {Layout::kDiamond, true,  false, false, false, true};
    case 'c': return {Layout::kGrid,    false, false, false, true,  true};
    case 'd': return {Layout::kDiamond, false, false, false, true,  true};
    case 'e': return {Layout::kHLine,   true,  true,  false, false, true};
    case 'f': return {Layout::kDLine,   true,  true,  false, false, true};
    case 'g': return {Layout::kHLine,   false, false, false, true,  false};
    case 'h': return {Layout::kDLine,   false, false, false, true,  false};
    case 'i': return {Layout::kGrid,    true,  false, true,  true,  false};
    case 'j': return {Layout::kDiamond, true,  false, true,  false, false};
    case 'k': return {Layout::kGrid,    false, false, true,  true,  false};
    case 'l': return {Layout::kDiamond, false, false, true,  true,  false};
    case 'm': return {Layout::kHLine,   true,  true,  true,  false, false};
    case 'n': return {Layout::kDLine,   true,  true,  true,  false, false};
    case 'o': return {Layout::kHLine,   false, false, true,  true,  false};
    case 'p': return {Layout::kDLine,   false, false, true,  true,  false};
    default:
      throw std::invalid_argument(std::string("unknown golden pattern '") + pattern + "'");
  }
}

// Cluster center for index c in {0..3}. Lines use unit spacing per dimension
// so the diagonal and horizontal variants project identically onto each axis.
std::pair<double, double> cluster_center(Layout layout, int c) {
  const double b0 = static_cast<double>(c & 1);
  const double b1 = static_cast<double>((c >> 1) & 1);
  const double r = std::sqrt(0.5);
  switch (layout) {
    case Layout::kGrid:
      return {b0, b1};
    case Layout::kDiamond:  // grid rotated 45 degrees
      return {r * (b0 - b1), r * (b0 + b1)};
    case Layout::kHLine:
      return {2.0 * b1 + b0, 0.0};
    case Layout::kDLine: {
      const double t = 2.0 * b1 + b0;
      return {t, t};
    }
  }
  return {0.0, 0.0};
}

}  // namespace

GoldenCode generate_golden_code(char pattern, int points_per_cluster, double jitter_sd,
                                Rng& rng) {
  if (points_per_cluster < 1) {
    throw std::invalid_argument("generate_golden_code: points_per_cluster must be >= 1");
  }
  if (jitter_sd < 0.0) {
    throw std::invalid_argument("generate_golden_code: jitter_sd must be >= 0");
  }
  const PatternDef def = pattern_def(pattern);
  const double sd = jitter_sd + (def.noisy ? kNoisyPatternSd : 0.0);

  GoldenCode code;
  code.pattern = pattern;
  code.flag_modular = def.flag_modular;
  code.flag_explicit = def.flag_explicit;

  std::vector<int> col0, col1;
  for (int c = 0; c < 4; ++c) {
    const auto [cx, cy] = cluster_center(def.layout, c);
    for (int p = 0; p < points_per_cluster; ++p) {
      const double nx = sd > 0.0 ? rng.normal(0.0, sd) : 0.0;
      const double ny = sd > 0.0 ? rng.normal(0.0, sd) : 0.0;
      code.points.push_back(cx + nx);
      code.points.push_back(cy + ny);
      if (def.two_factor) {
        const int b0 = c & 1;
        const int b1 = (c >> 1) & 1;
        if (def.xor_labels) {
          col0.push_back(b1);       // color: high index bit, linearly separable
          col1.push_back(b0 ^ b1);  // symbol: XOR of the index bits
        } else {
          col0.push_back(b0);
          col1.push_back(b1);
        }
      } else {
        col0.push_back(c);  // one factor with four values
      }
    }
  }

  code.factors.names.push_back("color");
  code.factors.columns.push_back(std::move(col0));
  if (def.two_factor) {
    code.factors.names.push_back("symbol");
    code.factors.columns.push_back(std::move(col1));
    if (def.xor_labels) {
      code.separable_factor = 0;
      code.entangled_factor = 1;
    }
  }
  return code;
}

}  // namespace fse
