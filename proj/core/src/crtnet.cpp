#include "ecgraph/crtnet.hpp"

#include <algorithm>

namespace ecgraph {

using ad::Var;

namespace {

struct ParamSpec {
  std::string name;
  std::vector<std::size_t> shape;
  enum class Kind { Weight, Bias, Gain } kind = Kind::Weight;
  std::size_t fan_in = 0, fan_out = 0;
};

std::vector<ParamSpec> param_specs(const ModelConfig& cfg) {
  using Kind = ParamSpec::Kind;
  std::vector<ParamSpec> specs;
  auto weight = [&](std::string name, std::vector<std::size_t> shape, std::size_t fi, std::size_t fo) {
    specs.push_back({std::move(name), std::move(shape), Kind::Weight, fi, fo});
  };
  auto bias = [&](std::string name, std::size_t n) {
    specs.push_back({std::move(name), {n}, Kind::Bias, 0, 0});
  };

  const auto C = std::size_t(cfg.conv_channels);
  const auto K = std::size_t(cfg.kernel_size);
  for (int i = 0; i < cfg.n_cnn_blocks; ++i) {
    std::string p = "conv" + std::to_string(i) + ".";
    std::size_t cin = i == 0 ? std::size_t(cfg.input_leads) : C;
    weight(p + "w1", {C, cin, K}, cin * K, C * K);
    bias(p + "b1", C);
    weight(p + "w2", {C, C, K}, C * K, C * K);
    bias(p + "b2", C);
  }

  const auto H = std::size_t(cfg.gru_hidden);
  for (const char* dir : {"fwd", "bwd"}) {
    std::string p = std::string("gru.") + dir + ".";
    for (const char* gate : {"z", "r", "h"}) {
      weight(p + "w" + gate, {C, H}, C, H);
      weight(p + "u" + gate, {H, H}, H, H);
      bias(p + "b" + gate, H);
    }
  }

  const auto d = std::size_t(cfg.d_model());
  const auto dk = d / std::size_t(cfg.n_heads);
  const auto ff = std::size_t(cfg.ff_dim);
  for (int e = 0; e < cfg.n_encoders; ++e) {
    std::string p = "enc" + std::to_string(e) + ".";
    for (int h = 0; h < cfg.n_heads; ++h) {
      std::string hp = p + "att.h" + std::to_string(h) + ".";
      weight(hp + "wq", {d, dk}, d, dk);
      weight(hp + "wk", {d, dk}, d, dk);
      weight(hp + "wv", {d, dk}, d, dk);
    }
    weight(p + "att.wo", {d, d}, d, d);
    specs.push_back({p + "ln1.gain", {d}, Kind::Gain, 0, 0});
    bias(p + "ln1.bias", d);
    weight(p + "ff.w1", {d, ff}, d, ff);
    bias(p + "ff.b1", ff);
    weight(p + "ff.w2", {ff, d}, ff, d);
    bias(p + "ff.b2", d);
    specs.push_back({p + "ln2.gain", {d}, Kind::Gain, 0, 0});
    bias(p + "ln2.bias", d);
  }

  const auto nc = std::size_t(cfg.n_classes);
  weight("head.w1", {d, d}, d, d);
  bias("head.b1", d);
  weight("head.w2", {d, nc}, d, nc);
  bias("head.b2", nc);
  return specs;
}

const ad::Var& bound_at(const nn::ParamVars& bound, const std::string& name) {
  auto it = bound.find(name);
  if (it == bound.end()) fail(Errc::ConfigShapeMismatch, "missing parameter " + name);
  return it->second;
}

} // namespace

std::vector<int> ModelConfig::stage_lengths() const {
  std::vector<int> lengths{input_length};
  int L = input_length;
  for (int i = 0; i < n_cnn_blocks; ++i) {
    L = L / pool_size;
    lengths.push_back(L);
  }
  return lengths;
}

void ModelConfig::validate() const {
  auto positive = [](int v, const char* what) {
    if (v <= 0) fail(Errc::ConfigShapeMismatch, std::string(what) + " must be positive");
  };
  positive(input_length, "input_length");
  positive(input_leads, "input_leads");
  positive(n_cnn_blocks, "n_cnn_blocks");
  positive(conv_channels, "conv_channels");
  positive(kernel_size, "kernel_size");
  positive(pool_size, "pool_size");
  positive(gru_hidden, "gru_hidden");
  positive(n_encoders, "n_encoders");
  positive(n_heads, "n_heads");
  positive(ff_dim, "ff_dim");
  if (n_classes < 2) fail(Errc::ConfigShapeMismatch, "n_classes must be at least 2");
  if (kernel_size % 2 == 0) fail(Errc::ConfigShapeMismatch, "kernel_size must be odd");
  if (d_model() % n_heads != 0)
    fail(Errc::ConfigShapeMismatch, "model width " + std::to_string(d_model()) +
                                        " is not divisible by " + std::to_string(n_heads) + " heads");
  if (d_model() % 2 != 0) fail(Errc::OddModelDim, "model width must be even");
  if (dropout_rate < 0.0 || dropout_rate >= 1.0)
    fail(Errc::ConfigShapeMismatch, "dropout_rate must be in [0,1)");
  if (reduced_length() < 1)
    fail(Errc::ConfigShapeMismatch, "input_length " + std::to_string(input_length) +
                                        " vanishes after " + std::to_string(n_cnn_blocks) +
                                        " pooling stages");
}

CrtNetParams init_params(const ModelConfig& cfg, Rng& rng) {
  cfg.validate();
  CrtNetParams params;
  for (const auto& spec : param_specs(cfg)) {
    Tensor t(spec.shape, spec.kind == ParamSpec::Kind::Gain ? 1.0 : 0.0);
    if (spec.kind == ParamSpec::Kind::Weight) nn::glorot_fill(t, spec.fan_in, spec.fan_out, rng);
    params.tensors.emplace(spec.name, std::move(t));
  }
  return params;
}

std::size_t param_count(const CrtNetParams& params) {
  std::size_t n = 0;
  for (const auto& [name, t] : params.tensors) n += t.numel();
  return n;
}

void check_params(const ModelConfig& cfg, const CrtNetParams& params) {
  auto specs = param_specs(cfg);
  if (specs.size() != params.tensors.size())
    fail(Errc::ConfigShapeMismatch,
         "parameter count mismatch: config implies " + std::to_string(specs.size()) + " tensors, have " +
             std::to_string(params.tensors.size()));
  for (const auto& spec : specs) {
    auto it = params.tensors.find(spec.name);
    if (it == params.tensors.end()) fail(Errc::ConfigShapeMismatch, "missing parameter " + spec.name);
    if (it->second.shape() != spec.shape)
      fail(Errc::ConfigShapeMismatch, "parameter " + spec.name + " has shape " +
                                          it->second.shape_str() + ", expected " +
                                          Tensor(spec.shape).shape_str());
  }
}

ForwardResult crtnet_forward(const ModelConfig& cfg, const nn::ParamVars& bound, const Tensor& x,
                             bool training, Rng* rng) {
  return crtnet_forward(cfg, bound, Var::constant(x), training, rng);
}

ForwardResult crtnet_forward(const ModelConfig& cfg, const nn::ParamVars& bound, const ad::Var& x,
                             bool training, Rng* rng) {
  const Tensor& xv = x.value();
  if (xv.rank() != 2 || xv.rows() != std::size_t(cfg.input_length) ||
      xv.cols() != std::size_t(cfg.input_leads))
    fail(Errc::ShapeMismatch, "input shape " + xv.shape_str() + " does not match config [" +
                                  std::to_string(cfg.input_length) + "," +
                                  std::to_string(cfg.input_leads) + "]");
  if (training && cfg.dropout_rate > 0.0 && rng == nullptr)
    fail(Errc::ConfigShapeMismatch, "training forward pass needs an rng for dropout");

  Var cur = x;
  for (int i = 0; i < cfg.n_cnn_blocks; ++i) {
    std::string p = "conv" + std::to_string(i) + ".";
    nn::ConvBlockParams block{bound_at(bound, p + "w1"), bound_at(bound, p + "b1"),
                              bound_at(bound, p + "w2"), bound_at(bound, p + "b2")};
    cur = nn::conv_block(cur, block, std::size_t(cfg.pool_size), cfg.leaky_slope);
  }

  auto gru_params = [&](const char* dir) {
    std::string p = std::string("gru.") + dir + ".";
    return nn::GruParams{bound_at(bound, p + "wz"), bound_at(bound, p + "uz"), bound_at(bound, p + "bz"),
                         bound_at(bound, p + "wr"), bound_at(bound, p + "ur"), bound_at(bound, p + "br"),
                         bound_at(bound, p + "wh"), bound_at(bound, p + "uh"), bound_at(bound, p + "bh")};
  };
  cur = nn::bigru(cur, gru_params("fwd"), gru_params("bwd"));

  cur = ad::add(cur, Var::constant(nn::positional_encoding(cur.value().rows(),
                                                           std::size_t(cfg.d_model()))));

  for (int e = 0; e < cfg.n_encoders; ++e) {
    std::string p = "enc" + std::to_string(e) + ".";
    nn::EncoderParams enc;
    for (int h = 0; h < cfg.n_heads; ++h) {
      std::string hp = p + "att.h" + std::to_string(h) + ".";
      enc.att.wq.push_back(bound_at(bound, hp + "wq"));
      enc.att.wk.push_back(bound_at(bound, hp + "wk"));
      enc.att.wv.push_back(bound_at(bound, hp + "wv"));
    }
    enc.att.wo = bound_at(bound, p + "att.wo");
    enc.ln1_gain = bound_at(bound, p + "ln1.gain");
    enc.ln1_bias = bound_at(bound, p + "ln1.bias");
    enc.ff_w1 = bound_at(bound, p + "ff.w1");
    enc.ff_b1 = bound_at(bound, p + "ff.b1");
    enc.ff_w2 = bound_at(bound, p + "ff.w2");
    enc.ff_b2 = bound_at(bound, p + "ff.b2");
    enc.ln2_gain = bound_at(bound, p + "ln2.gain");
    enc.ln2_bias = bound_at(bound, p + "ln2.bias");
    cur = nn::transformer_encoder(cur, enc);
  }

  if (training && cfg.dropout_rate > 0.0)
    cur = ad::mul(cur, Var::constant(nn::dropout_mask(cur.value().shape(), cfg.dropout_rate, *rng)));

  Var pooled = ad::mean_rows(cur);
  Var hidden = ad::relu(ad::add(ad::matmul(pooled, bound_at(bound, "head.w1")),
                                bound_at(bound, "head.b1")));
  Var logits = ad::add(ad::matmul(hidden, bound_at(bound, "head.w2")), bound_at(bound, "head.b2"));
  return {logits, ad::softmax_rows(logits)};
}

Tensor predict_probs(const ModelConfig& cfg, const CrtNetParams& params, const Tensor& x) {
  auto bound = nn::bind_params(params.tensors, false);
  return crtnet_forward(cfg, bound, x).probs.value();
}

int predict_class(const ModelConfig& cfg, const CrtNetParams& params, const Tensor& x) {
  Tensor p = predict_probs(cfg, params, x);
  std::size_t best = 0;
  for (std::size_t j = 1; j < p.numel(); ++j)
    if (p[j] > p[best]) best = j;
  return int(best);
}

} // namespace ecgraph
