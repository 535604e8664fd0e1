#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ecgraph/nn.hpp"

namespace ecgraph {

// Classifier over fixed-length multi-lead signals: a CNN front end, a
// bi-directional GRU, a transformer encoder stack with sinusoidal position
// information, then mean pooling and a two-layer softmax head.
struct ModelConfig {
  int input_length = 200;
  int input_leads = 1;
  int n_classes = 2;

  int n_cnn_blocks = 1;
  int conv_channels = 128;
  int kernel_size = 3;
  int pool_size = 2;

  int gru_hidden = 64; // concatenated directions give the model width 2*gru_hidden

  int n_encoders = 4;
  int n_heads = 8;
  int ff_dim = 512; // 4x the model width

  double dropout_rate = 0.2;
  double leaky_slope = 0.01;

  int d_model() const { return 2 * gru_hidden; }
  // Sequence length after each pooling stage; front() is the input length.
  std::vector<int> stage_lengths() const;
  // Length entering the recurrent stage.
  int reduced_length() const { return stage_lengths().back(); }
  void validate() const;
};

struct CrtNetParams {
  nn::ParamTensors tensors;
};

// Glorot-uniform weights, zero biases, unit layer-norm gains.
CrtNetParams init_params(const ModelConfig& cfg, Rng& rng);

// Total parameter count.
std::size_t param_count(const CrtNetParams& params);

// Checks that the stored tensors are exactly the set the config implies.
void check_params(const ModelConfig& cfg, const CrtNetParams& params);

struct ForwardResult {
  ad::Var logits; // [1, n_classes]
  ad::Var probs;  // softmax of logits
};

// Builds the full graph for one example x:[input_length, input_leads].
// `bound` are the parameter leaves (see nn::bind_params). When training is
// true a dropout mask is applied after the encoder stack, drawn from rng.
ForwardResult crtnet_forward(const ModelConfig& cfg, const nn::ParamVars& bound, const Tensor& x,
                             bool training = false, Rng* rng = nullptr);
// Same, with the input already wrapped (a differentiable input leaf works).
ForwardResult crtnet_forward(const ModelConfig& cfg, const nn::ParamVars& bound, const ad::Var& x,
                             bool training = false, Rng* rng = nullptr);

// Inference helper: class probabilities for one example.
Tensor predict_probs(const ModelConfig& cfg, const CrtNetParams& params, const Tensor& x);
int predict_class(const ModelConfig& cfg, const CrtNetParams& params, const Tensor& x);

} // namespace ecgraph
