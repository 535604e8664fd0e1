#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ecgraph/autodiff.hpp"
#include "ecgraph/rng.hpp"
#include "ecgraph/tensor.hpp"

namespace ecgraph::nn {

using ad::Var;

// Named parameter store. std::map keeps iteration order stable, which the
// checkpoint format and the optimizer state rely on.
using ParamTensors = std::map<std::string, Tensor>;
// The same names bound as autodiff leaves for one forward/backward pass.
using ParamVars = std::map<std::string, Var>;

ParamVars bind_params(const ParamTensors& params, bool requires_grad = true);

// Glorot-uniform fill: limit = sqrt(6 / (fan_in + fan_out)).
void glorot_fill(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng);

// ---- building blocks -----------------------------------------------------

struct ConvBlockParams {
  Var w1, b1, w2, b2; // w:[out,in,k] b:[out]
};

// conv -> leaky relu -> conv -> leaky relu -> maxpool over time.
Var conv_block(const Var& x, const ConvBlockParams& p, std::size_t pool, double slope);

struct GruParams {
  Var wz, uz, bz; // update gate
  Var wr, ur, br; // reset gate
  Var wh, uh, bh; // candidate state
};

// One GRU step. x:[1,in], h_prev:[1,H] -> [1,H].
// z = sig(xWz + hUz + bz); r = sig(xWr + hUr + br);
// hc = tanh(xWh + (h.r)Uh + bh); h' = (1-z).h + z.hc
Var gru_step(const Var& x, const Var& h_prev, const GruParams& p);

// Runs the forward pass over all rows of x:[T,in] from a zero initial
// state and stacks the hidden states -> [T,H]. reverse_time walks rows
// T-1..0 and stacks the result back in input order.
Var gru_sequence(const Var& x, const GruParams& p, bool reverse_time);

// Forward and backward passes concatenated per step -> [T,2H].
Var bigru(const Var& x, const GruParams& fwd, const GruParams& bwd);

// Sinusoidal position table: pe[t,2i] = sin(t / 10000^(2i/d)),
// pe[t,2i+1] = cos of the same argument. d must be even.
Tensor positional_encoding(std::size_t length, std::size_t d_model);

// softmax(q k^T / sqrt(dk)) v. q,k:[T,dk], v:[T,dv].
Var scaled_dot_attention(const Var& q, const Var& k, const Var& v);

struct AttentionParams {
  std::vector<Var> wq, wk, wv; // one [d,dk] per head
  Var wo;                      // [d,d]
};

Var multi_head_attention(const Var& x, const AttentionParams& p);

struct EncoderParams {
  AttentionParams att;
  Var ln1_gain, ln1_bias;
  Var ff_w1, ff_b1, ff_w2, ff_b2;
  Var ln2_gain, ln2_bias;
};

// Post-norm residual encoder:
// a = LN(x + MHA(x)); out = LN(a + FF(a)), FF = relu(a w1 + b1) w2 + b2.
Var transformer_encoder(const Var& x, const EncoderParams& p);

// Inverted-dropout mask as a constant factor tensor: each entry is
// 1/(1-rate) with probability 1-rate, else 0. Multiply with activations
// during training; skip entirely at inference.
Tensor dropout_mask(const std::vector<std::size_t>& shape, double rate, Rng& rng);

} // namespace ecgraph::nn
