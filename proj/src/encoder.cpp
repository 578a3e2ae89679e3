#include "fstat/encoder.hpp"

#include <cmath>
#include <stdexcept>

#include "fstat/errors.hpp"

namespace fse {

EncoderModel EncoderModel::init(std::vector<int> layer_sizes, Rng& rng) {
  if (layer_sizes.size() < 2) {
    throw std::invalid_argument("encoder: need at least input and output layer sizes");
  }
  for (int s : layer_sizes) {
    if (s < 1) throw std::invalid_argument("encoder: layer sizes must be positive");
  }
  EncoderModel model;
  model.layer_sizes = std::move(layer_sizes);
  for (std::size_t l = 0; l + 1 < model.layer_sizes.size(); ++l) {
    const int fan_in = model.layer_sizes[l];
    const int fan_out = model.layer_sizes[l + 1];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    std::vector<double> w(static_cast<std::size_t>(fan_out) * fan_in);
    for (double& v : w) v = rng.uniform(-bound, bound);
    model.weights.push_back(std::move(w));
    model.biases.emplace_back(fan_out, 0.0);
  }
  return model;
}

void EncoderModel::validate() const {
  if (layer_sizes.size() < 2 || weights.size() != layer_sizes.size() - 1 ||
      biases.size() != weights.size()) {
    throw shape_error("encoder: inconsistent layer bookkeeping");
  }
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const std::size_t expect =
        static_cast<std::size_t>(layer_sizes[l + 1]) * layer_sizes[l];
    if (weights[l].size() != expect ||
        biases[l].size() != static_cast<std::size_t>(layer_sizes[l + 1])) {
      throw shape_error("encoder: parameter shapes do not match layer sizes");
    }
    for (double v : weights[l]) {
      if (!std::isfinite(v)) throw std::invalid_argument("encoder: non-finite weight");
    }
    for (double v : biases[l]) {
      if (!std::isfinite(v)) throw std::invalid_argument("encoder: non-finite bias");
    }
  }
}

namespace {

// activations[l] holds layer l's outputs for all n rows (post-ReLU for hidden)
std::vector<std::vector<double>> run_forward(const EncoderModel& model,
                                             std::span<const double> inputs, std::size_t n) {
  const std::size_t in_dim = static_cast<std::size_t>(model.input_dim());
  if (inputs.size() != n * in_dim) {
    throw shape_error("encoder forward: input buffer does not match n * input_dim");
  }
  std::vector<std::vector<double>> acts(model.n_layers() + 1);
  acts[0].assign(inputs.begin(), inputs.end());
  for (std::size_t l = 0; l < model.n_layers(); ++l) {
    const int rows = model.layer_sizes[l + 1];
    const int cols = model.layer_sizes[l];
    const bool hidden = l + 1 < model.n_layers();
    acts[l + 1].resize(n * static_cast<std::size_t>(rows));
    for (std::size_t i = 0; i < n; ++i) {
      const double* src = acts[l].data() + i * cols;
      double* dst = acts[l + 1].data() + i * rows;
      for (int r = 0; r < rows; ++r) {
        double z = model.biases[l][r];
        const double* w = model.weights[l].data() + static_cast<std::size_t>(r) * cols;
        for (int c = 0; c < cols; ++c) z += w[c] * src[c];
        dst[r] = hidden ? std::max(0.0, z) : z;
      }
    }
  }
  return acts;
}

}  // namespace

std::vector<double> forward(const EncoderModel& model, std::span<const double> inputs,
                            std::size_t n) {
  return run_forward(model, inputs, n).back();
}

ParamGrads backward(const EncoderModel& model, std::span<const double> inputs,
                    std::size_t n, std::span<const double> upstream) {
  const auto acts = run_forward(model, inputs, n);
  if (upstream.size() != n * static_cast<std::size_t>(model.embedding_dim())) {
    throw shape_error("encoder backward: upstream gradient shape mismatch");
  }

  ParamGrads grads;
  grads.weights.resize(model.n_layers());
  grads.biases.resize(model.n_layers());
  for (std::size_t l = 0; l < model.n_layers(); ++l) {
    grads.weights[l].assign(model.weights[l].size(), 0.0);
    grads.biases[l].assign(model.biases[l].size(), 0.0);
  }

  std::vector<double> delta(upstream.begin(), upstream.end());
  for (std::size_t l = model.n_layers(); l-- > 0;) {
    const int rows = model.layer_sizes[l + 1];
    const int cols = model.layer_sizes[l];
    const bool hidden = l + 1 < model.n_layers();
    std::vector<double> next_delta(n * static_cast<std::size_t>(cols), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double* a_in = acts[l].data() + i * cols;
      const double* a_out = acts[l + 1].data() + i * rows;
      double* d = delta.data() + i * rows;
      double* nd = next_delta.data() + i * cols;
      for (int r = 0; r < rows; ++r) {
        // ReLU gate: units that were clamped pass no gradient
        if (hidden && a_out[r] <= 0.0) d[r] = 0.0;
        const double g = d[r];
        if (g == 0.0) continue;
        double* gw = grads.weights[l].data() + static_cast<std::size_t>(r) * cols;
        const double* w = model.weights[l].data() + static_cast<std::size_t>(r) * cols;
        for (int c = 0; c < cols; ++c) {
          gw[c] += g * a_in[c];
          nd[c] += g * w[c];
        }
        grads.biases[l][r] += g;
      }
    }
    delta = std::move(next_delta);
  }
  return grads;
}

AdamState AdamState::init(const EncoderModel& model, double learning_rate) {
  if (!(learning_rate > 0.0)) {
    throw std::invalid_argument("adam: learning rate must be positive");
  }
  AdamState st;
  st.learning_rate = learning_rate;
  for (std::size_t l = 0; l < model.n_layers(); ++l) {
    st.m_w.emplace_back(model.weights[l].size(), 0.0);
    st.v_w.emplace_back(model.weights[l].size(), 0.0);
    st.m_b.emplace_back(model.biases[l].size(), 0.0);
    st.v_b.emplace_back(model.biases[l].size(), 0.0);
  }
  return st;
}

namespace {

void adam_update(std::vector<double>& params, const std::vector<double>& grad,
                 std::vector<double>& m, std::vector<double>& v, const AdamState& st,
                 double bc1, double bc2) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grad[i];
    if (!std::isfinite(g)) throw train_error("adam: non-finite gradient");
    m[i] = st.beta1 * m[i] + (1.0 - st.beta1) * g;
    v[i] = st.beta2 * v[i] + (1.0 - st.beta2) * g * g;
    const double m_hat = m[i] / bc1;
    const double v_hat = v[i] / bc2;
    params[i] -= st.learning_rate * m_hat / (std::sqrt(v_hat) + st.epsilon);
  }
}

}  // namespace

void adam_step(EncoderModel& model, const ParamGrads& grads, AdamState& state) {
  if (grads.weights.size() != model.n_layers() || state.m_w.size() != model.n_layers()) {
    throw shape_error("adam: gradient/state shapes do not match the model");
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t l = 0; l < model.n_layers(); ++l) {
    adam_update(model.weights[l], grads.weights[l], state.m_w[l], state.v_w[l], state, bc1, bc2);
    adam_update(model.biases[l], grads.biases[l], state.m_b[l], state.v_b[l], state, bc1, bc2);
  }
}

}  // namespace fse
