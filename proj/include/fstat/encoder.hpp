#pragma once

#include <span>
#include <vector>

#include "fstat/rng.hpp"

namespace fse {

// Fully connected encoder: ReLU on hidden layers, linear output, no output
// normalization. Weights are row-major (out x in).
struct EncoderModel {
  std::vector<int> layer_sizes;  // input dim, hidden dims..., embedding dim
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;

  static EncoderModel init(std::vector<int> layer_sizes, Rng& rng);

  int input_dim() const { return layer_sizes.front(); }
  int embedding_dim() const { return layer_sizes.back(); }
  std::size_t n_layers() const { return weights.size(); }
  void validate() const;
};

// Forward pass over n stacked input rows; returns n stacked embeddings.
std::vector<double> forward(const EncoderModel& model, std::span<const double> inputs,
                            std::size_t n);

struct ParamGrads {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
};

// Reverse-mode gradients of sum_i <upstream_i, z_i> with respect to every
// parameter, for embeddings z_i = forward(inputs_i).
ParamGrads backward(const EncoderModel& model, std::span<const double> inputs,
                    std::size_t n, std::span<const double> upstream);

struct AdamState {
  long step = 0;
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::vector<std::vector<double>> m_w, v_w, m_b, v_b;

  static AdamState init(const EncoderModel& model, double learning_rate);
};

// Standard bias-corrected ADAM update, in place. Throws train_error on
// non-finite gradients.
void adam_step(EncoderModel& model, const ParamGrads& grads, AdamState& state);

}  // namespace fse
