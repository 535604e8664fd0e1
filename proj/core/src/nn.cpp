#include "ecgraph/nn.hpp"

#include <cmath>

namespace ecgraph::nn {

ParamVars bind_params(const ParamTensors& params, bool requires_grad) {
  ParamVars vars;
  for (const auto& [name, t] : params) vars.emplace(name, Var::leaf(t, requires_grad));
  return vars;
}

void glorot_fill(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  double limit = std::sqrt(6.0 / double(fan_in + fan_out));
  for (std::size_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(-limit, limit);
}

Var conv_block(const Var& x, const ConvBlockParams& p, std::size_t pool, double slope) {
  Var h = ad::leaky_relu(ad::conv1d_same(x, p.w1, p.b1), slope);
  h = ad::leaky_relu(ad::conv1d_same(h, p.w2, p.b2), slope);
  return ad::maxpool_rows(h, pool);
}

Var gru_step(const Var& x, const Var& h_prev, const GruParams& p) {
  Var z = ad::sigmoid(ad::add(ad::add(ad::matmul(x, p.wz), ad::matmul(h_prev, p.uz)), p.bz));
  Var r = ad::sigmoid(ad::add(ad::add(ad::matmul(x, p.wr), ad::matmul(h_prev, p.ur)), p.br));
  Var hc = ad::tanh_op(
      ad::add(ad::add(ad::matmul(x, p.wh), ad::matmul(ad::mul(h_prev, r), p.uh)), p.bh));
  Var keep = ad::affine(z, -1.0, 1.0); // 1 - z
  return ad::add(ad::mul(keep, h_prev), ad::mul(z, hc));
}

Var gru_sequence(const Var& x, const GruParams& p, bool reverse_time) {
  const std::size_t T = x.value().rows();
  const std::size_t H = p.uz.value().rows();
  Var h = Var::constant(Tensor({std::size_t(1), H}));
  std::vector<Var> states(T);
  for (std::size_t i = 0; i < T; ++i) {
    std::size_t t = reverse_time ? T - 1 - i : i;
    h = gru_step(ad::row(x, t), h, p);
    states[t] = h;
  }
  return ad::stack_rows(states);
}

Var bigru(const Var& x, const GruParams& fwd, const GruParams& bwd) {
  return ad::concat_cols(gru_sequence(x, fwd, false), gru_sequence(x, bwd, true));
}

Tensor positional_encoding(std::size_t length, std::size_t d_model) {
  if (d_model % 2 != 0)
    fail(Errc::OddModelDim, "positional encoding needs an even model width, have " +
                                std::to_string(d_model));
  Tensor pe({length, d_model});
  for (std::size_t t = 0; t < length; ++t)
    for (std::size_t i = 0; i < d_model / 2; ++i) {
      double angle = double(t) / std::pow(10000.0, 2.0 * double(i) / double(d_model));
      pe.at2(t, 2 * i) = std::sin(angle);
      pe.at2(t, 2 * i + 1) = std::cos(angle);
    }
  return pe;
}

Var scaled_dot_attention(const Var& q, const Var& k, const Var& v) {
  double scale = 1.0 / std::sqrt(double(k.value().cols()));
  Var scores = ad::affine(ad::matmul(q, ad::transpose(k)), scale, 0.0);
  return ad::matmul(ad::softmax_rows(scores), v);
}

Var multi_head_attention(const Var& x, const AttentionParams& p) {
  if (p.wq.empty() || p.wq.size() != p.wk.size() || p.wq.size() != p.wv.size())
    fail(Errc::ConfigShapeMismatch, "attention: per-head projections are inconsistent");
  Var heads;
  for (std::size_t h = 0; h < p.wq.size(); ++h) {
    Var att = scaled_dot_attention(ad::matmul(x, p.wq[h]), ad::matmul(x, p.wk[h]),
                                   ad::matmul(x, p.wv[h]));
    heads = h == 0 ? att : ad::concat_cols(heads, att);
  }
  return ad::matmul(heads, p.wo);
}

Var transformer_encoder(const Var& x, const EncoderParams& p) {
  Var a = ad::layer_norm_rows(ad::add(x, multi_head_attention(x, p.att)), p.ln1_gain, p.ln1_bias);
  Var f = ad::add(ad::matmul(ad::relu(ad::add(ad::matmul(a, p.ff_w1), p.ff_b1)), p.ff_w2), p.ff_b2);
  return ad::layer_norm_rows(ad::add(a, f), p.ln2_gain, p.ln2_bias);
}

Tensor dropout_mask(const std::vector<std::size_t>& shape, double rate, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0)
    fail(Errc::ConfigShapeMismatch, "dropout rate must be in [0,1)");
  Tensor m(shape, 1.0);
  if (rate == 0.0) return m;
  double keep = 1.0 - rate;
  for (std::size_t i = 0; i < m.numel(); ++i) m[i] = rng.uniform() < keep ? 1.0 / keep : 0.0;
  return m;
}

} // namespace ecgraph::nn
