#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"

#include "ecgraph/nn.hpp"
#include "helpers.hpp"

using namespace ecgraph;
using ecgraph::ad::Var;

namespace {

Tensor t2(std::size_t r, std::size_t c, std::vector<double> v) {
  Tensor t({r, c});
  t.data() = std::move(v);
  return t;
}

nn::GruParams zero_gru(std::size_t in, std::size_t h) {
  nn::GruParams p;
  p.wz = Var::leaf(Tensor({in, h}));
  p.uz = Var::leaf(Tensor({h, h}));
  p.bz = Var::leaf(Tensor({h}));
  p.wr = Var::leaf(Tensor({in, h}));
  p.ur = Var::leaf(Tensor({h, h}));
  p.br = Var::leaf(Tensor({h}));
  p.wh = Var::leaf(Tensor({in, h}));
  p.uh = Var::leaf(Tensor({h, h}));
  p.bh = Var::leaf(Tensor({h}));
  return p;
}

nn::GruParams random_gru(std::size_t in, std::size_t h, Rng& rng) {
  auto rand_leaf = [&](std::vector<std::size_t> shape) {
    Tensor t(shape);
    for (auto& v : t.data()) v = rng.uniform(-0.7, 0.7);
    return Var::leaf(t);
  };
  nn::GruParams p;
  p.wz = rand_leaf({in, h});
  p.uz = rand_leaf({h, h});
  p.bz = rand_leaf({h});
  p.wr = rand_leaf({in, h});
  p.ur = rand_leaf({h, h});
  p.br = rand_leaf({h});
  p.wh = rand_leaf({in, h});
  p.uh = rand_leaf({h, h});
  p.bh = rand_leaf({h});
  return p;
}

Var random_input(std::size_t t, std::size_t c, Rng& rng) {
  Tensor x({t, c});
  for (auto& v : x.data()) v = rng.uniform(-1.0, 1.0);
  return Var::leaf(x, false);
}

} // namespace

TEST_SUITE("nn") {

  TEST_CASE("zero weights make the zero state a gru fixed point") {
    // z = sig(0) = 0.5, hc = tanh(0) = 0, h' = 0.5*h + 0.5*0 = 0 at h = 0.
    nn::GruParams p = zero_gru(3, 4);
    Var x = Var::leaf(t2(1, 3, {1.0, -2.0, 0.5}), false);
    Var h0 = Var::leaf(Tensor({1, 4}), false);
    Var h1 = nn::gru_step(x, h0, p);
    REQUIRE(h1.value().rows() == 1);
    REQUIRE(h1.value().cols() == 4);
    for (double v : h1.value().data()) CHECK(v == doctest::Approx(0.0));
  }

  TEST_CASE("gru step interpolates between previous and candidate state") {
    // With all weights zero, z = 0.5 and hc = tanh(bh).
    nn::GruParams p = zero_gru(2, 2);
    Tensor bh({2});
    bh.data() = {5.0, -5.0}; // tanh ~ +/-0.9999
    p.bh = Var::leaf(bh);
    Var x = Var::leaf(Tensor({1, 2}), false);
    Var h0 = Var::leaf(t2(1, 2, {0.4, 0.8}), false);
    Var h1 = nn::gru_step(x, h0, p);
    CHECK(h1.value()[0] == doctest::Approx(0.5 * 0.4 + 0.5 * std::tanh(5.0)).epsilon(1e-9));
    CHECK(h1.value()[1] == doctest::Approx(0.5 * 0.8 + 0.5 * std::tanh(-5.0)).epsilon(1e-9));
  }

  TEST_CASE("reversed gru equals the forward gru on the reversed input") {
    Rng rng = Rng::seeded(404);
    nn::GruParams p = random_gru(3, 5, rng);
    Var x = random_input(6, 3, rng);
    Tensor flipped({6, 3});
    for (std::size_t t = 0; t < 6; ++t)
      for (std::size_t c = 0; c < 3; ++c) flipped.at2(t, c) = x.value().at2(5 - t, c);

    Var rev = nn::gru_sequence(x, p, true);
    Var fwd_on_flipped = nn::gru_sequence(Var::leaf(flipped, false), p, false);
    REQUIRE(rev.value().rows() == 6);
    // rev[t] is the state after consuming x[T-1..t], i.e. fwd_on_flipped[T-1-t]
    for (std::size_t t = 0; t < 6; ++t)
      for (std::size_t c = 0; c < 5; ++c)
        CHECK(rev.value().at2(t, c) ==
              doctest::Approx(fwd_on_flipped.value().at2(5 - t, c)).epsilon(1e-12));
  }

  TEST_CASE("bigru concatenates the forward and backward passes") {
    Rng rng = Rng::seeded(77);
    nn::GruParams fwd = random_gru(2, 3, rng);
    nn::GruParams bwd = random_gru(2, 3, rng);
    Var x = random_input(4, 2, rng);
    Var both = nn::bigru(x, fwd, bwd);
    REQUIRE(both.value().rows() == 4);
    REQUIRE(both.value().cols() == 6);
    Var f = nn::gru_sequence(x, fwd, false);
    Var b = nn::gru_sequence(x, bwd, true);
    for (std::size_t t = 0; t < 4; ++t)
      for (std::size_t c = 0; c < 3; ++c) {
        CHECK(both.value().at2(t, c) == doctest::Approx(f.value().at2(t, c)).epsilon(1e-12));
        CHECK(both.value().at2(t, c + 3) == doctest::Approx(b.value().at2(t, c)).epsilon(1e-12));
      }
  }

  TEST_CASE("positional encoding interleaves sine and cosine") {
    Tensor pe = nn::positional_encoding(8, 4);
    REQUIRE(pe.shape() == std::vector<std::size_t>{8, 4});
    // t = 0: sin(0) = 0, cos(0) = 1 in every pair
    CHECK(pe.at2(0, 0) == doctest::Approx(0.0));
    CHECK(pe.at2(0, 1) == doctest::Approx(1.0));
    CHECK(pe.at2(0, 2) == doctest::Approx(0.0));
    CHECK(pe.at2(0, 3) == doctest::Approx(1.0));
    // t = 1: first pair argument is 1, second pair argument 1/10000^(2/4)
    CHECK(pe.at2(1, 0) == doctest::Approx(std::sin(1.0)));
    CHECK(pe.at2(1, 1) == doctest::Approx(std::cos(1.0)));
    CHECK(pe.at2(1, 2) == doctest::Approx(std::sin(0.01)));
    CHECK(pe.at2(1, 3) == doctest::Approx(std::cos(0.01)));
    CHECK_THROWS_AS(nn::positional_encoding(4, 5), Error); // odd width
  }

  TEST_CASE("attention with zero queries averages the values") {
    Rng rng = Rng::seeded(5);
    Var q = Var::leaf(Tensor({3, 2}), false);
    Var k = random_input(3, 2, rng);
    Var v = random_input(3, 4, rng);
    Var out = nn::scaled_dot_attention(q, k, v);
    REQUIRE(out.value().rows() == 3);
    REQUIRE(out.value().cols() == 4);
    for (std::size_t t = 0; t < 3; ++t)
      for (std::size_t c = 0; c < 4; ++c) {
        double mean = (v.value().at2(0, c) + v.value().at2(1, c) + v.value().at2(2, c)) / 3.0;
        CHECK(out.value().at2(t, c) == doctest::Approx(mean).epsilon(1e-12));
      }
  }

  TEST_CASE("attention over a single position returns the value row") {
    Rng rng = Rng::seeded(6);
    Var q = random_input(1, 3, rng);
    Var k = random_input(1, 3, rng);
    Var v = random_input(1, 5, rng);
    Var out = nn::scaled_dot_attention(q, k, v);
    for (std::size_t c = 0; c < 5; ++c)
      CHECK(out.value().at2(0, c) == doctest::Approx(v.value().at2(0, c)).epsilon(1e-12));
  }

  TEST_CASE("multi-head attention keeps the model width") {
    Rng rng = Rng::seeded(7);
    const std::size_t d = 6, heads = 3, dk = d / heads;
    nn::AttentionParams p;
    auto rand_leaf = [&](std::size_t r, std::size_t c) {
      Tensor t({r, c});
      for (auto& x : t.data()) x = rng.uniform(-0.5, 0.5);
      return Var::leaf(t);
    };
    for (std::size_t h = 0; h < heads; ++h) {
      p.wq.push_back(rand_leaf(d, dk));
      p.wk.push_back(rand_leaf(d, dk));
      p.wv.push_back(rand_leaf(d, dk));
    }
    p.wo = rand_leaf(d, d);
    Var x = random_input(5, d, rng);
    Var out = nn::multi_head_attention(x, p);
    CHECK(out.value().rows() == 5);
    CHECK(out.value().cols() == d);
  }

  TEST_CASE("transformer encoder rows come out normalized") {
    Rng rng = Rng::seeded(8);
    const std::size_t d = 4, ff = 8;
    auto rand_leaf = [&](std::vector<std::size_t> shape, double lim) {
      Tensor t(shape);
      for (auto& x : t.data()) x = rng.uniform(-lim, lim);
      return Var::leaf(t);
    };
    nn::EncoderParams e;
    e.att.wq.push_back(rand_leaf({d, d}, 0.5));
    e.att.wk.push_back(rand_leaf({d, d}, 0.5));
    e.att.wv.push_back(rand_leaf({d, d}, 0.5));
    e.att.wo = rand_leaf({d, d}, 0.5);
    Tensor ones({d}, 1.0);
    e.ln1_gain = Var::leaf(ones);
    e.ln1_bias = Var::leaf(Tensor({d}));
    e.ff_w1 = rand_leaf({d, ff}, 0.5);
    e.ff_b1 = rand_leaf({ff}, 0.1);
    e.ff_w2 = rand_leaf({ff, d}, 0.5);
    e.ff_b2 = rand_leaf({d}, 0.1);
    e.ln2_gain = Var::leaf(ones);
    e.ln2_bias = Var::leaf(Tensor({d}));
    Var x = random_input(6, d, rng);
    Var out = nn::transformer_encoder(x, e);
    REQUIRE(out.value().rows() == 6);
    REQUIRE(out.value().cols() == d);
    // final layer norm with unit gain and zero bias: rows have mean 0, var ~ 1
    for (std::size_t i = 0; i < 6; ++i) {
      double mean = 0, var = 0;
      for (std::size_t j = 0; j < d; ++j) mean += out.value().at2(i, j);
      mean /= double(d);
      for (std::size_t j = 0; j < d; ++j) {
        double dv = out.value().at2(i, j) - mean;
        var += dv * dv;
      }
      var /= double(d);
      CHECK(mean == doctest::Approx(0.0).epsilon(1e-9));
      CHECK(var == doctest::Approx(1.0).epsilon(1e-2));
    }
  }

  TEST_CASE("dropout masks hold only zero and the inverted keep rate") {
    Rng rng = Rng::seeded(9);
    Tensor m = nn::dropout_mask({40, 25}, 0.2, rng);
    std::size_t kept = 0;
    for (double v : m.data()) {
      bool valid = v == 0.0 || v == doctest::Approx(1.0 / 0.8);
      CHECK(valid);
      if (v != 0.0) ++kept;
    }
    CHECK(kept > 600); // ~800 of 1000 expected
    CHECK(kept < 950);

    Rng r0 = Rng::seeded(9);
    Tensor again = nn::dropout_mask({40, 25}, 0.2, r0);
    CHECK(again.data() == m.data());

    Rng r1 = Rng::seeded(10);
    Tensor all = nn::dropout_mask({10, 10}, 0.0, r1);
    for (double v : all.data()) CHECK(v == 1.0);
  }

  TEST_CASE("glorot fill stays within its fan-derived bound") {
    Rng rng = Rng::seeded(11);
    Tensor t({50, 20});
    nn::glorot_fill(t, 50, 20, rng);
    const double limit = std::sqrt(6.0 / 70.0);
    double lo = 0, hi = 0;
    for (double v : t.data()) {
      CHECK(std::abs(v) <= limit);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    // actually spreads over the range
    CHECK(lo < -0.5 * limit);
    CHECK(hi > 0.5 * limit);
  }

  TEST_CASE("bind_params exposes every tensor under its name") {
    nn::ParamTensors params;
    params["a"] = Tensor({2, 2}, 1.0);
    params["b"] = Tensor({3}, 2.0);
    nn::ParamVars vars = nn::bind_params(params);
    REQUIRE(vars.size() == 2);
    CHECK(vars.at("a").value().same_shape(params.at("a")));
    CHECK(vars.at("b").value()[0] == 2.0);
    CHECK(vars.at("a").requires_grad());
    nn::ParamVars frozen = nn::bind_params(params, false);
    CHECK_FALSE(frozen.at("b").requires_grad());
  }
}
