#include <cmath>
#include <vector>

#include "doctest.h"

#include "ecgraph/autodiff.hpp"
#include "ecgraph/gradcheck.hpp"
#include "helpers.hpp"

using namespace ecgraph;
using ecgraph::ad::Var;

namespace {

Tensor t2(std::size_t r, std::size_t c, std::vector<double> v) {
  Tensor t({r, c});
  t.data() = std::move(v);
  return t;
}

Tensor t1(std::vector<double> v) {
  Tensor t({v.size()});
  t.data() = std::move(v);
  return t;
}

} // namespace

TEST_SUITE("autodiff") {

  TEST_CASE("matmul values and gradients by hand") {
    Var a = Var::leaf(t2(2, 2, {1, 2, 3, 4}));
    Var b = Var::leaf(t2(2, 2, {5, 6, 7, 8}));
    Var y = ad::matmul(a, b);
    CHECK(y.value().data() == std::vector<double>{19, 22, 43, 50});

    ad::backward(ad::sum(y));
    // d(sum)/da[i][k] = sum_j b[k][j], d(sum)/db[k][j] = sum_i a[i][k]
    CHECK(a.grad().data() == std::vector<double>{11, 15, 11, 15});
    CHECK(b.grad().data() == std::vector<double>{4, 4, 6, 6});
  }

  TEST_CASE("matmul rejects mismatched inner dimensions") {
    Var a = Var::leaf(Tensor({2, 3}, 1.0));
    Var b = Var::leaf(Tensor({2, 2}, 1.0));
    CHECK_THROWS_AS(ad::matmul(a, b), Error);
  }

  TEST_CASE("add broadcasts a row vector and sums its gradient over rows") {
    Var a = Var::leaf(t2(2, 3, {1, 2, 3, 4, 5, 6}));
    Var b = Var::leaf(t1({10, 20, 30}));
    Var y = ad::add(a, b);
    CHECK(y.value().data() == std::vector<double>{11, 22, 33, 14, 25, 36});
    ad::backward(ad::sum(y));
    CHECK(a.grad().data() == std::vector<double>{1, 1, 1, 1, 1, 1});
    CHECK(b.grad().data() == std::vector<double>{2, 2, 2});
  }

  TEST_CASE("add rejects shapes that neither match nor broadcast") {
    Var a = Var::leaf(Tensor({2, 3}, 1.0));
    Var b = Var::leaf(Tensor({2}, 1.0));
    CHECK_THROWS_AS(ad::add(a, b), Error);
  }

  TEST_CASE("mul passes the partner value through to each gradient") {
    Var a = Var::leaf(t2(1, 3, {2, 3, 4}));
    Var b = Var::leaf(t2(1, 3, {5, 6, 7}));
    Var y = ad::mul(a, b);
    CHECK(y.value().data() == std::vector<double>{10, 18, 28});
    ad::backward(ad::sum(y));
    CHECK(a.grad().data() == std::vector<double>{5, 6, 7});
    CHECK(b.grad().data() == std::vector<double>{2, 3, 4});
  }

  TEST_CASE("affine scales gradients by its slope") {
    Var a = Var::leaf(t1({1, -2}));
    Var y = ad::affine(a, 3.0, 10.0);
    CHECK(y.value().data() == std::vector<double>{13, 4});
    ad::backward(ad::sum(y));
    CHECK(a.grad().data() == std::vector<double>{3, 3});
  }

  TEST_CASE("activations at pinned points") {
    Var x = Var::leaf(t1({0.0, -2.0, 2.0}));
    CHECK(ad::sigmoid(x).value()[0] == doctest::Approx(0.5));
    CHECK(ad::tanh_op(x).value()[0] == doctest::Approx(0.0));
    Var r = ad::relu(x);
    CHECK(r.value().data() == std::vector<double>{0, 0, 2});
    Var l = ad::leaky_relu(x, 0.1);
    CHECK(l.value()[1] == doctest::Approx(-0.2));
    ad::backward(ad::sum(l));
    CHECK(x.grad()[1] == doctest::Approx(0.1));
    CHECK(x.grad()[2] == doctest::Approx(1.0));
  }

  TEST_CASE("softmax rows are distributions with known values") {
    Var x = Var::leaf(t2(2, 3, {0, 0, 0, 0, std::log(2.0), 0}));
    Var s = ad::softmax_rows(x);
    double r0 = s.value().at2(0, 0) + s.value().at2(0, 1) + s.value().at2(0, 2);
    double r1 = s.value().at2(1, 0) + s.value().at2(1, 1) + s.value().at2(1, 2);
    CHECK(r0 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r1 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.value().at2(0, 0) == doctest::Approx(1.0 / 3));
    CHECK(s.value().at2(1, 1) == doctest::Approx(0.5));
    CHECK(s.value().at2(1, 0) == doctest::Approx(0.25));
  }

  TEST_CASE("conv1d with a centered identity kernel reproduces the input") {
    Var x = Var::leaf(t2(5, 1, {1, 2, 3, 4, 5}));
    Tensor w({1, 1, 3});
    w.data() = {0, 1, 0};
    Var y = ad::conv1d_same(x, Var::leaf(w), Var::leaf(t1({0})));
    CHECK(y.value().data() == std::vector<double>{1, 2, 3, 4, 5});
  }

  TEST_CASE("conv1d shifts with an off-center kernel and zero-pads the edge") {
    Var x = Var::leaf(t2(4, 1, {1, 2, 3, 4}));
    Tensor w({1, 1, 3});
    w.data() = {1, 0, 0}; // out[t] = x[t-1]
    Var y = ad::conv1d_same(x, Var::leaf(w), Var::leaf(t1({0})));
    CHECK(y.value().data() == std::vector<double>{0, 1, 2, 3});
  }

  TEST_CASE("conv1d validates weight and bias shapes") {
    Var x = Var::leaf(Tensor({4, 2}, 1.0));
    CHECK_THROWS_AS(ad::conv1d_same(x, Var::leaf(Tensor({1, 3, 3}, 0.0)), Var::leaf(Tensor({1}, 0.0))),
                    Error); // in-channels mismatch
    CHECK_THROWS_AS(ad::conv1d_same(x, Var::leaf(Tensor({1, 2, 4}, 0.0)), Var::leaf(Tensor({1}, 0.0))),
                    Error); // even kernel
    CHECK_THROWS_AS(ad::conv1d_same(x, Var::leaf(Tensor({1, 2, 3}, 0.0)), Var::leaf(Tensor({2}, 0.0))),
                    Error); // bias length
  }

  TEST_CASE("maxpool keeps window maxima and routes gradient to the earliest tie") {
    Var x = Var::leaf(t2(4, 1, {5, 5, 3, 4}));
    Var y = ad::maxpool_rows(x, 2);
    CHECK(y.value().data() == std::vector<double>{5, 4});
    ad::backward(ad::sum(y));
    CHECK(x.grad().data() == std::vector<double>{1, 0, 0, 1});
  }

  TEST_CASE("maxpool drops the tail beyond the last full window") {
    Var x = Var::leaf(t2(5, 2, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}));
    Var y = ad::maxpool_rows(x, 2);
    REQUIRE(y.value().rows() == 2);
    CHECK(y.value().data() == std::vector<double>{3, 4, 7, 8});
    CHECK_THROWS_AS(ad::maxpool_rows(Var::leaf(Tensor({1, 2}, 0.0)), 2), Error);
  }

  TEST_CASE("layer norm standardizes each row then applies gain and bias") {
    Var x = Var::leaf(t2(2, 4, {1, 2, 3, 4, -3, -1, 1, 3}));
    Var gain = Var::leaf(t1({2, 2, 2, 2}));
    Var bias = Var::leaf(t1({5, 5, 5, 5}));
    Var y = ad::layer_norm_rows(x, gain, bias);
    for (std::size_t i = 0; i < 2; ++i) {
      double mean = 0, var = 0;
      for (std::size_t j = 0; j < 4; ++j) mean += y.value().at2(i, j);
      mean /= 4;
      for (std::size_t j = 0; j < 4; ++j) {
        double d = y.value().at2(i, j) - mean;
        var += d * d;
      }
      var /= 4;
      CHECK(mean == doctest::Approx(5.0).epsilon(1e-9));           // bias
      CHECK(std::sqrt(var) == doctest::Approx(2.0).epsilon(1e-3)); // gain, up to eps
    }
  }

  TEST_CASE("cross entropy of uniform logits is log of the class count") {
    Var logits = Var::leaf(t1({0.7, 0.7, 0.7, 0.7, 0.7}));
    Var loss = ad::cross_entropy_logits(logits, 2);
    CHECK(loss.value()[0] == doctest::Approx(std::log(5.0)));
    CHECK_THROWS_AS(ad::cross_entropy_logits(logits, 5), Error);
  }

  TEST_CASE("row, stack and concat rebuild matrices") {
    Var a = Var::leaf(t2(2, 2, {1, 2, 3, 4}));
    Var r0 = ad::row(a, 0);
    Var r1 = ad::row(a, 1);
    CHECK(r0.value().data() == std::vector<double>{1, 2});
    Var s = ad::stack_rows({r1, r0});
    CHECK(s.value().data() == std::vector<double>{3, 4, 1, 2});
    Var c = ad::concat_cols(r0, r1);
    CHECK(c.value().data() == std::vector<double>{1, 2, 3, 4});
    CHECK(c.value().rows() == 1);
    CHECK(c.value().cols() == 4);
    CHECK_THROWS_AS(ad::concat_cols(a, r0), Error); // row counts differ
  }

  TEST_CASE("transpose and mean_rows") {
    Var a = Var::leaf(t2(2, 3, {1, 2, 3, 4, 5, 6}));
    Var t = ad::transpose(a);
    CHECK(t.value().rows() == 3);
    CHECK(t.value().data() == std::vector<double>{1, 4, 2, 5, 3, 6});
    Var m = ad::mean_rows(a);
    CHECK(m.value().data() == std::vector<double>{2.5, 3.5, 4.5});
    ad::backward(ad::sum(m));
    CHECK(a.grad().data() == std::vector<double>{0.5, 0.5, 0.5, 0.5, 0.5, 0.5});
  }

  TEST_CASE("a value used twice accumulates both gradient paths") {
    Var x = Var::leaf(t1({3.0}));
    Var y = ad::add(ad::mul(x, x), x); // y = x^2 + x, dy/dx = 2x + 1
    ad::backward(ad::sum(y));
    CHECK(x.grad()[0] == doctest::Approx(7.0));
  }

  TEST_CASE("backward requires a scalar root") {
    Var x = Var::leaf(t1({1.0, 2.0}));
    CHECK_THROWS_AS(ad::backward(x), Error);
  }

  TEST_CASE("gradients are unavailable before backward and absent on constants") {
    Var x = Var::leaf(t1({1.0}));
    CHECK_FALSE(x.has_grad());
    CHECK_THROWS_AS(x.grad(), Error);
    Var k = Var::constant(t1({2.0}));
    ad::backward(ad::sum(ad::mul(x, k)));
    CHECK(x.grad()[0] == doctest::Approx(2.0));
    CHECK_FALSE(k.has_grad());
  }

  TEST_CASE("finite differences confirm the analytic gradients of core ops") {
    CHECK(grad_check("linear", 11).max_rel_err < 1e-7);
    CHECK(grad_check("softmax", 12).max_rel_err < 1e-4);
    CHECK(grad_check("layer_norm", 13).max_rel_err < 1e-4);
    CHECK(grad_check("maxpool", 14).max_rel_err < 1e-4);
  }

  TEST_CASE("gradient checks validate epsilon and op name") {
    CHECK_THROWS_AS(grad_check("linear", 1, 1e-8), Error);
    CHECK_THROWS_AS(grad_check("linear", 1, 1e-2), Error);
    CHECK_THROWS_AS(grad_check("no_such_op", 1), Error);
    CHECK_FALSE(grad_check_ops().empty());
  }
}
