#include "ecgraph/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

namespace ecgraph {

namespace {

using ad::Var;
using nn::ParamVars;

struct Case {
  nn::ParamTensors inputs; // every tensor here is differentiated
  std::function<Var(const ParamVars&)> build;
};

Tensor rand_tensor(std::vector<std::size_t> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

// Positive weights for reducing an output to a scalar. Drawn once per case
// so every finite-difference evaluation sees the identical loss function;
// scaled so the loss stays of order one and differences stay sharp.
Tensor make_coef(std::vector<std::size_t> shape, Rng& rng) {
  Tensor coef(std::move(shape));
  double scale = 4.0 / double(std::max<std::size_t>(1, coef.numel()));
  for (std::size_t i = 0; i < coef.numel(); ++i) coef[i] = rng.uniform(0.25, 1.25) * scale;
  return coef;
}

Var weighted_sum(const Var& y, const Tensor& coef) {
  return ad::sum(ad::mul(y, Var::constant(coef)));
}

Case make_linear(Rng& rng) {
  Case c;
  // Strictly positive draws keep every gradient entry bounded away from
  // zero, so the relative error reflects arithmetic alone.
  c.inputs["x"] = rand_tensor({3, 4}, rng, 0.25, 1.25);
  c.inputs["w"] = rand_tensor({4, 5}, rng, 0.25, 1.25);
  c.inputs["b"] = rand_tensor({5}, rng, 0.25, 1.25);
  Tensor coef = rand_tensor({3, 5}, rng, 0.25, 1.25);
  c.build = [coef](const ParamVars& v) {
    Var y = ad::add(ad::matmul(v.at("x"), v.at("w")), v.at("b"));
    return ad::sum(ad::mul(y, Var::constant(coef)));
  };
  return c;
}

Case make_softmax(Rng& rng) {
  Case c;
  c.inputs["x"] = rand_tensor({3, 7}, rng, -2.0, 2.0);
  Tensor coef = make_coef({3, 7}, rng);
  c.build = [coef](const ParamVars& v) { return weighted_sum(ad::softmax_rows(v.at("x")), coef); };
  return c;
}

Case make_layer_norm(Rng& rng) {
  Case c;
  c.inputs["x"] = rand_tensor({3, 6}, rng, -2.0, 2.0);
  c.inputs["gain"] = rand_tensor({6}, rng, 0.5, 1.5);
  c.inputs["bias"] = rand_tensor({6}, rng, -0.5, 0.5);
  Tensor coef = make_coef({3, 6}, rng);
  c.build = [coef](const ParamVars& v) {
    return weighted_sum(ad::layer_norm_rows(v.at("x"), v.at("gain"), v.at("bias")), coef);
  };
  return c;
}

Case make_maxpool(Rng& rng) {
  Case c;
  c.inputs["x"] = rand_tensor({9, 3}, rng, -2.0, 2.0);
  Tensor coef = make_coef({4, 3}, rng);
  c.build = [coef](const ParamVars& v) { return weighted_sum(ad::maxpool_rows(v.at("x"), 2), coef); };
  return c;
}

Case make_conv_block(Rng& rng) {
  Case c;
  c.inputs["x"] = rand_tensor({16, 3}, rng);
  c.inputs["w1"] = rand_tensor({4, 3, 3}, rng, -0.6, 0.6);
  c.inputs["b1"] = rand_tensor({4}, rng, 0.1, 0.3);
  c.inputs["w2"] = rand_tensor({4, 4, 3}, rng, -0.6, 0.6);
  c.inputs["b2"] = rand_tensor({4}, rng, 0.1, 0.3);
  Tensor coef = make_coef({8, 4}, rng);
  c.build = [coef](const ParamVars& v) {
    nn::ConvBlockParams p{v.at("w1"), v.at("b1"), v.at("w2"), v.at("b2")};
    return weighted_sum(nn::conv_block(v.at("x"), p, 2, 0.01), coef);
  };
  return c;
}

nn::GruParams gru_from(const ParamVars& v, const std::string& prefix) {
  return {v.at(prefix + "wz"), v.at(prefix + "uz"), v.at(prefix + "bz"),
          v.at(prefix + "wr"), v.at(prefix + "ur"), v.at(prefix + "br"),
          v.at(prefix + "wh"), v.at(prefix + "uh"), v.at(prefix + "bh")};
}

void add_gru_inputs(Case& c, const std::string& prefix, std::size_t in, std::size_t h, Rng& rng) {
  for (const char* gate : {"z", "r", "h"}) {
    c.inputs[prefix + "w" + gate] = rand_tensor({in, h}, rng, -0.7, 0.7);
    c.inputs[prefix + "u" + gate] = rand_tensor({h, h}, rng, -0.7, 0.7);
    c.inputs[prefix + "b" + gate] = rand_tensor({h}, rng, -0.3, 0.3);
  }
}

Case make_gru_step(Rng& rng) {
  Case c;
  c.inputs["x"] = rand_tensor({1, 4}, rng);
  c.inputs["h"] = rand_tensor({1, 5}, rng, -0.8, 0.8);
  add_gru_inputs(c, "", 4, 5, rng);
  Tensor coef = make_coef({1, 5}, rng);
  c.build = [coef](const ParamVars& v) {
    return weighted_sum(nn::gru_step(v.at("x"), v.at("h"), gru_from(v, "")), coef);
  };
  return c;
}

Case make_bigru(Rng& rng) {
  Case c;
  c.inputs["x"] = rand_tensor({5, 3}, rng);
  add_gru_inputs(c, "f.", 3, 4, rng);
  add_gru_inputs(c, "b.", 3, 4, rng);
  Tensor coef = make_coef({5, 8}, rng);
  c.build = [coef](const ParamVars& v) {
    return weighted_sum(nn::bigru(v.at("x"), gru_from(v, "f."), gru_from(v, "b.")), coef);
  };
  return c;
}

Case make_attention(Rng& rng) {
  Case c;
  c.inputs["q"] = rand_tensor({5, 4}, rng);
  c.inputs["k"] = rand_tensor({5, 4}, rng);
  c.inputs["v"] = rand_tensor({5, 6}, rng);
  Tensor coef = make_coef({5, 6}, rng);
  c.build = [coef](const ParamVars& v) {
    return weighted_sum(nn::scaled_dot_attention(v.at("q"), v.at("k"), v.at("v")), coef);
  };
  return c;
}

Case make_mha(Rng& rng) {
  Case c;
  c.inputs["x"] = rand_tensor({6, 16}, rng);
  for (int h = 0; h < 8; ++h) {
    std::string p = "h" + std::to_string(h) + ".";
    c.inputs[p + "wq"] = rand_tensor({16, 2}, rng, -0.5, 0.5);
    c.inputs[p + "wk"] = rand_tensor({16, 2}, rng, -0.5, 0.5);
    c.inputs[p + "wv"] = rand_tensor({16, 2}, rng, -0.5, 0.5);
  }
  c.inputs["wo"] = rand_tensor({16, 16}, rng, -0.5, 0.5);
  Tensor coef = make_coef({6, 16}, rng);
  c.build = [coef](const ParamVars& v) {
    nn::AttentionParams p;
    for (int h = 0; h < 8; ++h) {
      std::string pre = "h" + std::to_string(h) + ".";
      p.wq.push_back(v.at(pre + "wq"));
      p.wk.push_back(v.at(pre + "wk"));
      p.wv.push_back(v.at(pre + "wv"));
    }
    p.wo = v.at("wo");
    return weighted_sum(nn::multi_head_attention(v.at("x"), p), coef);
  };
  return c;
}

Case make_encoder(Rng& rng) {
  Case c;
  c.inputs["x"] = rand_tensor({4, 6}, rng);
  for (int h = 0; h < 2; ++h) {
    std::string p = "h" + std::to_string(h) + ".";
    c.inputs[p + "wq"] = rand_tensor({6, 3}, rng, -0.5, 0.5);
    c.inputs[p + "wk"] = rand_tensor({6, 3}, rng, -0.5, 0.5);
    c.inputs[p + "wv"] = rand_tensor({6, 3}, rng, -0.5, 0.5);
  }
  c.inputs["wo"] = rand_tensor({6, 6}, rng, -0.5, 0.5);
  c.inputs["ln1.gain"] = rand_tensor({6}, rng, 0.8, 1.2);
  c.inputs["ln1.bias"] = rand_tensor({6}, rng, -0.2, 0.2);
  c.inputs["ff.w1"] = rand_tensor({6, 10}, rng, -0.5, 0.5);
  c.inputs["ff.b1"] = rand_tensor({10}, rng, 0.05, 0.25);
  c.inputs["ff.w2"] = rand_tensor({10, 6}, rng, -0.5, 0.5);
  c.inputs["ff.b2"] = rand_tensor({6}, rng, -0.2, 0.2);
  c.inputs["ln2.gain"] = rand_tensor({6}, rng, 0.8, 1.2);
  c.inputs["ln2.bias"] = rand_tensor({6}, rng, -0.2, 0.2);
  Tensor coef = make_coef({4, 6}, rng);
  c.build = [coef](const ParamVars& v) {
    nn::EncoderParams e;
    for (int h = 0; h < 2; ++h) {
      std::string pre = "h" + std::to_string(h) + ".";
      e.att.wq.push_back(v.at(pre + "wq"));
      e.att.wk.push_back(v.at(pre + "wk"));
      e.att.wv.push_back(v.at(pre + "wv"));
    }
    e.att.wo = v.at("wo");
    e.ln1_gain = v.at("ln1.gain");
    e.ln1_bias = v.at("ln1.bias");
    e.ff_w1 = v.at("ff.w1");
    e.ff_b1 = v.at("ff.b1");
    e.ff_w2 = v.at("ff.w2");
    e.ff_b2 = v.at("ff.b2");
    e.ln2_gain = v.at("ln2.gain");
    e.ln2_bias = v.at("ln2.bias");
    return weighted_sum(nn::transformer_encoder(v.at("x"), e), coef);
  };
  return c;
}

ModelConfig gradcheck_model() {
  ModelConfig cfg;
  cfg.input_length = 12;
  cfg.input_leads = 2;
  cfg.n_classes = 3;
  cfg.n_cnn_blocks = 1;
  cfg.conv_channels = 3;
  cfg.kernel_size = 3;
  cfg.pool_size = 2;
  cfg.gru_hidden = 4;
  cfg.n_encoders = 1;
  cfg.n_heads = 2;
  cfg.ff_dim = 9;
  cfg.dropout_rate = 0.0;
  return cfg;
}

Case make_crtnet(Rng& rng) {
  Case c;
  ModelConfig cfg = gradcheck_model();
  CrtNetParams params = init_params(cfg, rng);
  c.inputs = params.tensors;
  c.inputs["input.x"] = rand_tensor({std::size_t(cfg.input_length), std::size_t(cfg.input_leads)}, rng);
  c.build = [cfg](const ParamVars& v) {
    ParamVars model_vars;
    for (const auto& [name, var] : v)
      if (name != "input.x") model_vars.emplace(name, var);
    // The input rides along as a leaf so its gradient is checked too.
    auto res = crtnet_forward(cfg, model_vars, v.at("input.x"));
    return ad::cross_entropy_logits(res.logits, 1);
  };
  return c;
}

Case build_case(const std::string& op, Rng& rng) {
  if (op == "linear") return make_linear(rng);
  if (op == "softmax") return make_softmax(rng);
  if (op == "layer_norm") return make_layer_norm(rng);
  if (op == "maxpool") return make_maxpool(rng);
  if (op == "conv_block") return make_conv_block(rng);
  if (op == "gru_step") return make_gru_step(rng);
  if (op == "bigru") return make_bigru(rng);
  if (op == "attention") return make_attention(rng);
  if (op == "multi_head_attention") return make_mha(rng);
  if (op == "transformer_encoder") return make_encoder(rng);
  if (op == "crtnet") return make_crtnet(rng);
  fail(Errc::UnknownOp, "no gradient-check case named '" + op + "'");
}

double eval_loss(const Case& c) {
  ParamVars vars = nn::bind_params(c.inputs, false);
  return c.build(vars).value()[0];
}

} // namespace

std::vector<std::string> grad_check_ops() {
  return {"linear",   "softmax",  "layer_norm", "maxpool",
          "conv_block", "gru_step", "bigru",      "attention",
          "multi_head_attention", "transformer_encoder", "crtnet"};
}

GradCheckResult grad_check(const std::string& op, std::uint64_t seed, double eps, double denom_floor) {
  if (eps < 1e-7 || eps > 1e-3)
    fail(Errc::ConfigShapeMismatch, "finite-difference epsilon outside [1e-7, 1e-3]");
  Rng rng = Rng::seeded(seed);
  Case c = build_case(op, rng);

  ParamVars vars = nn::bind_params(c.inputs, true);
  Var loss = c.build(vars);
  ad::backward(loss);
  nn::ParamTensors analytic;
  for (const auto& [name, var] : vars) analytic.emplace(name, var.grad());

  GradCheckResult res;
  res.op = op;
  Case probe = c; // mutated in place for the finite differences
  for (auto& [name, t] : probe.inputs) {
    const Tensor& a = analytic.at(name);
    for (std::size_t i = 0; i < t.numel(); ++i) {
      double orig = t[i];
      t[i] = orig + eps;
      double fp = eval_loss(probe);
      t[i] = orig - eps;
      double fm = eval_loss(probe);
      t[i] = orig;
      double numeric = (fp - fm) / (2.0 * eps);
      double rel = std::abs(a[i] - numeric) /
                   std::max({std::abs(a[i]), std::abs(numeric), denom_floor});
      ++res.n_coords;
      if (rel > res.max_rel_err) {
        res.max_rel_err = rel;
        res.worst_param = name;
        res.worst_index = i;
      }
    }
  }
  return res;
}

std::vector<GradCheckResult> grad_check_all(std::uint64_t seed, double eps) {
  std::vector<GradCheckResult> out;
  std::uint64_t salt = 0;
  for (const auto& op : grad_check_ops()) out.push_back(grad_check(op, seed + (salt++), eps));
  return out;
}

} // namespace ecgraph
