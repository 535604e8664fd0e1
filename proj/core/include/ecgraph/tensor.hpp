#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ecgraph/errors.hpp"

namespace ecgraph {

// Dense row-major tensor of doubles. Ranks 1..3 are what the model uses.
class Tensor {
public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0)
      : shape_(std::move(shape)) {
    std::size_t n = 1;
    for (auto d : shape_) {
      if (d == 0) fail(Errc::ShapeMismatch, "zero-sized tensor dimension");
      n *= d;
    }
    data_.assign(n, fill);
  }

  static Tensor scalar(double v) {
    Tensor t({1});
    t.data_[0] = v;
    return t;
  }
  static Tensor zeros_like(const Tensor& o) { return Tensor(o.shape_); }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t numel() const { return data_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }

  std::size_t rows() const { return require_rank(2), shape_[0]; }
  std::size_t cols() const { return require_rank(2), shape_[1]; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& at2(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  double at2(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }

  double& at3(std::size_t i, std::size_t j, std::size_t k) {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  double at3(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  std::string shape_str() const {
    std::string s = "[";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(shape_[i]);
    }
    return s + "]";
  }

private:
  void require_rank(std::size_t r) const {
    if (shape_.size() != r)
      fail(Errc::ShapeMismatch, "expected rank " + std::to_string(r) + " tensor, have " + shape_str());
  }
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b))
    fail(Errc::ShapeMismatch,
         std::string(what) + ": shapes " + a.shape_str() + " and " + b.shape_str() + " differ");
}

} // namespace ecgraph
