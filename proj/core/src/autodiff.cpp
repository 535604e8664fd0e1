#include "ecgraph/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace ecgraph::ad {

namespace {

Var make_node(Tensor value, std::vector<Var> parents, std::function<void(Node&)> backprop) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = false;
  n->parents.reserve(parents.size());
  for (const auto& p : parents) {
    n->parents.push_back(p.node());
    n->requires_grad = n->requires_grad || p.node()->requires_grad;
  }
  if (n->requires_grad) n->backprop = std::move(backprop);
  return Var::wrap(std::move(n));
}

Tensor& touch_grad(Node& n) {
  if (!n.grad_ready) {
    n.grad = Tensor(n.value.shape());
    n.grad_ready = true;
  }
  return n.grad;
}

// Accumulates src into parent i's gradient if that parent wants one.
void add_to_parent(Node& self, std::size_t i, const Tensor& src) {
  Node& p = *self.parents[i];
  if (!p.requires_grad) return;
  Tensor& g = touch_grad(p);
  require_same_shape(g, src, "gradient accumulation");
  for (std::size_t k = 0; k < src.numel(); ++k) g[k] += src[k];
}

void require_2d(const Tensor& t, const char* what) {
  if (t.rank() != 2) fail(Errc::ShapeMismatch, std::string(what) + ": expected 2-D, have " + t.shape_str());
}

std::vector<Node*> topo_order(Node* root) {
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  // Iterative post-order DFS; parents precede children in `order`.
  std::vector<std::pair<Node*, std::size_t>> stack{{root, 0}};
  seen.insert(root);
  while (!stack.empty()) {
    auto& [n, i] = stack.back();
    if (i < n->parents.size()) {
      Node* p = n->parents[i++].get();
      if (seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }
  return order;
}

} // namespace

void backward(const Var& root) {
  if (!root.defined()) fail(Errc::ShapeMismatch, "backward on empty variable");
  Node* r = root.node().get();
  if (r->value.numel() != 1) fail(Errc::ShapeMismatch, "backward root must be scalar, have " + r->value.shape_str());
  touch_grad(*r)[0] = 1.0;
  auto order = topo_order(r);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backprop && n->grad_ready) n->backprop(*n);
  }
}

Var matmul(const Var& a, const Var& b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_2d(av, "matmul lhs");
  require_2d(bv, "matmul rhs");
  if (av.cols() != bv.rows())
    fail(Errc::ShapeMismatch, "matmul: " + av.shape_str() + " x " + bv.shape_str());
  std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
  Tensor out({m, n});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p) {
      double x = av.at2(i, p);
      if (x == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) out.at2(i, j) += x * bv.at2(p, j);
    }
  return make_node(std::move(out), {a, b}, [m, k, n](Node& self) {
    const Tensor& g = self.grad;
    const Tensor& av2 = self.parents[0]->value;
    const Tensor& bv2 = self.parents[1]->value;
    if (self.parents[0]->requires_grad) {
      Tensor ga({m, k});
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          double gij = g.at2(i, j);
          if (gij == 0.0) continue;
          for (std::size_t p = 0; p < k; ++p) ga.at2(i, p) += gij * bv2.at2(p, j);
        }
      add_to_parent(self, 0, ga);
    }
    if (self.parents[1]->requires_grad) {
      Tensor gb({k, n});
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double x = av2.at2(i, p);
          if (x == 0.0) continue;
          for (std::size_t j = 0; j < n; ++j) gb.at2(p, j) += x * g.at2(i, j);
        }
      add_to_parent(self, 1, gb);
    }
  });
}

Var add(const Var& a, const Var& b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.same_shape(bv)) {
    Tensor out = av;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] += bv[i];
    return make_node(std::move(out), {a, b}, [](Node& self) {
      add_to_parent(self, 0, self.grad);
      add_to_parent(self, 1, self.grad);
    });
  }
  // Row-broadcast: a is [m,n], b is [n].
  if (av.rank() == 2 && bv.rank() == 1 && bv.dim(0) == av.cols()) {
    Tensor out = av;
    for (std::size_t i = 0; i < av.rows(); ++i)
      for (std::size_t j = 0; j < av.cols(); ++j) out.at2(i, j) += bv[j];
    return make_node(std::move(out), {a, b}, [](Node& self) {
      add_to_parent(self, 0, self.grad);
      if (self.parents[1]->requires_grad) {
        const Tensor& g = self.grad;
        Tensor gb({g.cols()});
        for (std::size_t i = 0; i < g.rows(); ++i)
          for (std::size_t j = 0; j < g.cols(); ++j) gb[j] += g.at2(i, j);
        add_to_parent(self, 1, gb);
      }
    });
  }
  fail(Errc::ShapeMismatch, "add: shapes " + av.shape_str() + " and " + bv.shape_str());
}

Var sub(const Var& a, const Var& b) {
  require_same_shape(a.value(), b.value(), "sub");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] -= b.value()[i];
  return make_node(std::move(out), {a, b}, [](Node& self) {
    add_to_parent(self, 0, self.grad);
    if (self.parents[1]->requires_grad) {
      Tensor gb = self.grad;
      for (std::size_t i = 0; i < gb.numel(); ++i) gb[i] = -gb[i];
      add_to_parent(self, 1, gb);
    }
  });
}

Var mul(const Var& a, const Var& b) {
  require_same_shape(a.value(), b.value(), "mul");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= b.value()[i];
  return make_node(std::move(out), {a, b}, [](Node& self) {
    const Tensor& g = self.grad;
    if (self.parents[0]->requires_grad) {
      Tensor ga = self.parents[1]->value;
      for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] *= g[i];
      add_to_parent(self, 0, ga);
    }
    if (self.parents[1]->requires_grad) {
      Tensor gb = self.parents[0]->value;
      for (std::size_t i = 0; i < gb.numel(); ++i) gb[i] *= g[i];
      add_to_parent(self, 1, gb);
    }
  });
}

Var affine(const Var& a, double k, double c) {
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = k * out[i] + c;
  return make_node(std::move(out), {a}, [k](Node& self) {
    Tensor ga = self.grad;
    for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] *= k;
    add_to_parent(self, 0, ga);
  });
}

Var sigmoid(const Var& a) {
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.numel(); ++i) {
    double x = out[i];
    out[i] = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  }
  return make_node(std::move(out), {a}, [](Node& self) {
    Tensor ga = self.grad;
    const Tensor& s = self.value;
    for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] *= s[i] * (1.0 - s[i]);
    add_to_parent(self, 0, ga);
  });
}

Var tanh_op(const Var& a) {
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = std::tanh(out[i]);
  return make_node(std::move(out), {a}, [](Node& self) {
    Tensor ga = self.grad;
    const Tensor& t = self.value;
    for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] *= 1.0 - t[i] * t[i];
    add_to_parent(self, 0, ga);
  });
}

Var relu(const Var& a) { return leaky_relu(a, 0.0); }

Var leaky_relu(const Var& a, double slope) {
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.numel(); ++i)
    if (out[i] < 0.0) out[i] *= slope;
  return make_node(std::move(out), {a}, [slope](Node& self) {
    Tensor ga = self.grad;
    const Tensor& x = self.parents[0]->value;
    for (std::size_t i = 0; i < ga.numel(); ++i)
      if (x[i] < 0.0) ga[i] *= slope;
    add_to_parent(self, 0, ga);
  });
}

Var softmax_rows(const Var& a) {
  require_2d(a.value(), "softmax_rows");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.rows(); ++i) {
    double m = out.at2(i, 0);
    for (std::size_t j = 1; j < out.cols(); ++j) m = std::max(m, out.at2(i, j));
    double z = 0.0;
    for (std::size_t j = 0; j < out.cols(); ++j) {
      double e = std::exp(out.at2(i, j) - m);
      out.at2(i, j) = e;
      z += e;
    }
    for (std::size_t j = 0; j < out.cols(); ++j) out.at2(i, j) /= z;
  }
  return make_node(std::move(out), {a}, [](Node& self) {
    const Tensor& s = self.value;
    const Tensor& g = self.grad;
    Tensor ga(s.shape());
    for (std::size_t i = 0; i < s.rows(); ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < s.cols(); ++j) dot += g.at2(i, j) * s.at2(i, j);
      for (std::size_t j = 0; j < s.cols(); ++j)
        ga.at2(i, j) = s.at2(i, j) * (g.at2(i, j) - dot);
    }
    add_to_parent(self, 0, ga);
  });
}

Var row(const Var& a, std::size_t t) {
  require_2d(a.value(), "row");
  if (t >= a.value().rows()) fail(Errc::ShapeMismatch, "row index out of range");
  std::size_t c = a.value().cols();
  Tensor out({1, c});
  for (std::size_t j = 0; j < c; ++j) out.at2(0, j) = a.value().at2(t, j);
  return make_node(std::move(out), {a}, [t, c](Node& self) {
    if (!self.parents[0]->requires_grad) return;
    Tensor& pg = touch_grad(*self.parents[0]);
    for (std::size_t j = 0; j < c; ++j) pg.at2(t, j) += self.grad.at2(0, j);
  });
}

Var stack_rows(const std::vector<Var>& rows) {
  if (rows.empty()) fail(Errc::ShapeMismatch, "stack_rows: no rows");
  std::size_t c = rows[0].value().cols();
  for (const auto& r : rows) {
    require_2d(r.value(), "stack_rows");
    if (r.value().rows() != 1 || r.value().cols() != c)
      fail(Errc::ShapeMismatch, "stack_rows: every row must be [1," + std::to_string(c) + "]");
  }
  Tensor out({rows.size(), c});
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < c; ++j) out.at2(i, j) = rows[i].value().at2(0, j);
  return make_node(std::move(out), rows, [c](Node& self) {
    for (std::size_t i = 0; i < self.parents.size(); ++i) {
      if (!self.parents[i]->requires_grad) continue;
      Tensor gr({1, c});
      for (std::size_t j = 0; j < c; ++j) gr.at2(0, j) = self.grad.at2(i, j);
      add_to_parent(self, i, gr);
    }
  });
}

Var concat_cols(const Var& a, const Var& b) {
  require_2d(a.value(), "concat_cols lhs");
  require_2d(b.value(), "concat_cols rhs");
  if (a.value().rows() != b.value().rows())
    fail(Errc::ShapeMismatch, "concat_cols: row counts differ");
  std::size_t m = a.value().rows(), ca = a.value().cols(), cb = b.value().cols();
  Tensor out({m, ca + cb});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < ca; ++j) out.at2(i, j) = a.value().at2(i, j);
    for (std::size_t j = 0; j < cb; ++j) out.at2(i, ca + j) = b.value().at2(i, j);
  }
  return make_node(std::move(out), {a, b}, [m, ca, cb](Node& self) {
    if (self.parents[0]->requires_grad) {
      Tensor ga({m, ca});
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < ca; ++j) ga.at2(i, j) = self.grad.at2(i, j);
      add_to_parent(self, 0, ga);
    }
    if (self.parents[1]->requires_grad) {
      Tensor gb({m, cb});
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < cb; ++j) gb.at2(i, j) = self.grad.at2(i, ca + j);
      add_to_parent(self, 1, gb);
    }
  });
}

Var transpose(const Var& a) {
  require_2d(a.value(), "transpose");
  std::size_t m = a.value().rows(), n = a.value().cols();
  Tensor out({n, m});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out.at2(j, i) = a.value().at2(i, j);
  return make_node(std::move(out), {a}, [m, n](Node& self) {
    Tensor ga({m, n});
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) ga.at2(i, j) = self.grad.at2(j, i);
    add_to_parent(self, 0, ga);
  });
}

Var mean_rows(const Var& a) {
  require_2d(a.value(), "mean_rows");
  std::size_t m = a.value().rows(), n = a.value().cols();
  Tensor out({1, n});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out.at2(0, j) += a.value().at2(i, j);
  for (std::size_t j = 0; j < n; ++j) out.at2(0, j) /= double(m);
  return make_node(std::move(out), {a}, [m, n](Node& self) {
    Tensor ga({m, n});
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) ga.at2(i, j) = self.grad.at2(0, j) / double(m);
    add_to_parent(self, 0, ga);
  });
}

Var sum(const Var& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.value().numel(); ++i) s += a.value()[i];
  return make_node(Tensor::scalar(s), {a}, [](Node& self) {
    Tensor ga(self.parents[0]->value.shape());
    for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] = self.grad[0];
    add_to_parent(self, 0, ga);
  });
}

Var conv1d_same(const Var& x, const Var& w, const Var& b) {
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  const Tensor& bv = b.value();
  require_2d(xv, "conv1d input");
  if (wv.rank() != 3) fail(Errc::ShapeMismatch, "conv1d weight must be [out,in,k]");
  if (bv.rank() != 1) fail(Errc::ShapeMismatch, "conv1d bias must be [out]");
  std::size_t L = xv.rows(), cin = xv.cols();
  std::size_t cout = wv.dim(0), k = wv.dim(2);
  if (wv.dim(1) != cin) fail(Errc::ShapeMismatch, "conv1d: weight in-channels != input channels");
  if (bv.dim(0) != cout) fail(Errc::ShapeMismatch, "conv1d: bias length != out channels");
  if (k % 2 == 0) fail(Errc::ShapeMismatch, "conv1d: kernel size must be odd for same padding");
  std::size_t pad = (k - 1) / 2;

  Tensor out({L, cout});
  for (std::size_t t = 0; t < L; ++t)
    for (std::size_t o = 0; o < cout; ++o) {
      double acc = bv[o];
      for (std::size_t j = 0; j < k; ++j) {
        std::size_t src = t + j;
        if (src < pad || src - pad >= L) continue;
        std::size_t ts = src - pad;
        for (std::size_t ci = 0; ci < cin; ++ci) acc += xv.at2(ts, ci) * wv.at3(o, ci, j);
      }
      out.at2(t, o) = acc;
    }
  return make_node(std::move(out), {x, w, b}, [L, cin, cout, k, pad](Node& self) {
    const Tensor& g = self.grad;
    const Tensor& xv2 = self.parents[0]->value;
    const Tensor& wv2 = self.parents[1]->value;
    bool want_x = self.parents[0]->requires_grad;
    bool want_w = self.parents[1]->requires_grad;
    bool want_b = self.parents[2]->requires_grad;
    Tensor gx({L, cin});
    Tensor gw({cout, cin, k});
    Tensor gb({cout});
    for (std::size_t t = 0; t < L; ++t)
      for (std::size_t o = 0; o < cout; ++o) {
        double go = g.at2(t, o);
        if (go == 0.0) continue;
        gb[o] += go;
        for (std::size_t j = 0; j < k; ++j) {
          std::size_t src = t + j;
          if (src < pad || src - pad >= L) continue;
          std::size_t ts = src - pad;
          for (std::size_t ci = 0; ci < cin; ++ci) {
            if (want_x) gx.at2(ts, ci) += go * wv2.at3(o, ci, j);
            if (want_w) gw.at3(o, ci, j) += go * xv2.at2(ts, ci);
          }
        }
      }
    if (want_x) add_to_parent(self, 0, gx);
    if (want_w) add_to_parent(self, 1, gw);
    if (want_b) add_to_parent(self, 2, gb);
  });
}

Var maxpool_rows(const Var& x, std::size_t k) {
  require_2d(x.value(), "maxpool input");
  if (k == 0) fail(Errc::ShapeMismatch, "maxpool: window must be positive");
  std::size_t L = x.value().rows(), c = x.value().cols();
  std::size_t outL = L / k;
  if (outL == 0) fail(Errc::ShapeMismatch, "maxpool: input shorter than window");
  Tensor out({outL, c});
  // argmax row per output cell; ties resolve to the earliest row.
  std::vector<std::size_t> arg(outL * c);
  for (std::size_t i = 0; i < outL; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      std::size_t best = i * k;
      double bv = x.value().at2(best, j);
      for (std::size_t r = i * k + 1; r < (i + 1) * k; ++r) {
        double v = x.value().at2(r, j);
        if (v > bv) {
          bv = v;
          best = r;
        }
      }
      out.at2(i, j) = bv;
      arg[i * c + j] = best;
    }
  return make_node(std::move(out), {x}, [L, c, outL, arg = std::move(arg)](Node& self) {
    Tensor gx({L, c});
    for (std::size_t i = 0; i < outL; ++i)
      for (std::size_t j = 0; j < c; ++j) gx.at2(arg[i * c + j], j) += self.grad.at2(i, j);
    add_to_parent(self, 0, gx);
  });
}

Var layer_norm_rows(const Var& x, const Var& gain, const Var& bias, double eps) {
  require_2d(x.value(), "layer_norm input");
  std::size_t m = x.value().rows(), n = x.value().cols();
  if (gain.value().rank() != 1 || gain.value().dim(0) != n)
    fail(Errc::ShapeMismatch, "layer_norm: gain length != columns");
  if (bias.value().rank() != 1 || bias.value().dim(0) != n)
    fail(Errc::ShapeMismatch, "layer_norm: bias length != columns");
  Tensor out({m, n});
  Tensor xhat({m, n});
  std::vector<double> istd(m);
  for (std::size_t i = 0; i < m; ++i) {
    double mu = 0.0;
    for (std::size_t j = 0; j < n; ++j) mu += x.value().at2(i, j);
    mu /= double(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double d = x.value().at2(i, j) - mu;
      var += d * d;
    }
    var /= double(n);
    double is = 1.0 / std::sqrt(var + eps);
    istd[i] = is;
    for (std::size_t j = 0; j < n; ++j) {
      double xh = (x.value().at2(i, j) - mu) * is;
      xhat.at2(i, j) = xh;
      out.at2(i, j) = gain.value()[j] * xh + bias.value()[j];
    }
  }
  return make_node(std::move(out), {x, gain, bias},
                   [m, n, xhat = std::move(xhat), istd = std::move(istd)](Node& self) {
    const Tensor& g = self.grad;
    const Tensor& gv = self.parents[1]->value;
    if (self.parents[0]->requires_grad) {
      Tensor gx({m, n});
      for (std::size_t i = 0; i < m; ++i) {
        // dxhat = g * gain; dx follows from the per-row normalisation.
        double sum_dxh = 0.0, sum_dxh_xh = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          double dxh = g.at2(i, j) * gv[j];
          sum_dxh += dxh;
          sum_dxh_xh += dxh * xhat.at2(i, j);
        }
        for (std::size_t j = 0; j < n; ++j) {
          double dxh = g.at2(i, j) * gv[j];
          gx.at2(i, j) = istd[i] * (dxh - sum_dxh / double(n) - xhat.at2(i, j) * sum_dxh_xh / double(n));
        }
      }
      add_to_parent(self, 0, gx);
    }
    if (self.parents[1]->requires_grad) {
      Tensor gg({n});
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) gg[j] += g.at2(i, j) * xhat.at2(i, j);
      add_to_parent(self, 1, gg);
    }
    if (self.parents[2]->requires_grad) {
      Tensor gb({n});
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) gb[j] += g.at2(i, j);
      add_to_parent(self, 2, gb);
    }
  });
}

Var cross_entropy_logits(const Var& logits, std::size_t label) {
  const Tensor& lv = logits.value();
  std::size_t c;
  if (lv.rank() == 1) {
    c = lv.dim(0);
  } else if (lv.rank() == 2 && lv.rows() == 1) {
    c = lv.cols();
  } else {
    fail(Errc::ShapeMismatch, "cross_entropy: logits must be a single row, have " + lv.shape_str());
  }
  if (label >= c) fail(Errc::LabelOutOfRange, "cross_entropy: label " + std::to_string(label));
  double m = lv[0];
  for (std::size_t j = 1; j < c; ++j) m = std::max(m, lv[j]);
  double z = 0.0;
  for (std::size_t j = 0; j < c; ++j) z += std::exp(lv[j] - m);
  double loss = m + std::log(z) - lv[label];
  std::vector<double> soft(c);
  for (std::size_t j = 0; j < c; ++j) soft[j] = std::exp(lv[j] - m) / z;
  return make_node(Tensor::scalar(loss), {logits},
                   [label, soft = std::move(soft)](Node& self) {
    Tensor gl(self.parents[0]->value.shape());
    double g = self.grad[0];
    for (std::size_t j = 0; j < gl.numel(); ++j) gl[j] = g * soft[j];
    gl[label] -= g;
    add_to_parent(self, 0, gl);
  });
}

} // namespace ecgraph::ad
