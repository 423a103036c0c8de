#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace advtag {

struct ShapeError : std::runtime_error {
  explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ValueError : std::runtime_error {
  explicit ValueError(const std::string& msg) : std::runtime_error(msg) {}
};

inline std::string shape_str(const std::vector<int>& shape) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ",";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

/// Dense row-major tensor of doubles with an accumulated-gradient buffer.
/// The grad buffer is allocated lazily; `frozen` tensors never receive
/// gradient contributions during backward.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> values;
  std::vector<double> grad;  // empty until ensure_grad()
  bool frozen = false;

  Tensor() = default;
  Tensor(std::vector<int> s, std::vector<double> v)
      : shape(std::move(s)), values(std::move(v)) {
    if (static_cast<size_t>(count(shape)) != values.size())
      throw ShapeError("tensor: shape " + shape_str(shape) + " does not match " +
                       std::to_string(values.size()) + " values");
  }
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    values.assign(static_cast<size_t>(count(shape)), 0.0);
  }

  static long count(const std::vector<int>& s) {
    long n = 1;
    for (int d : s) {
      if (d <= 0) throw ShapeError("tensor: non-positive dimension in " + shape_str(s));
      n *= d;
    }
    return n;
  }

  size_t size() const { return values.size(); }
  bool is_scalar() const { return values.size() == 1; }

  int rows() const { return shape.empty() ? 1 : shape[0]; }
  int cols() const { return shape.size() < 2 ? 1 : shape[1]; }

  void ensure_grad() {
    if (grad.size() != values.size()) grad.assign(values.size(), 0.0);
  }
  void zero_grad() {
    if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
  }

  bool values_finite() const {
    for (double v : values)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

using TensorPtr = std::shared_ptr<Tensor>;

inline TensorPtr make_tensor(std::vector<int> shape, std::vector<double> values) {
  return std::make_shared<Tensor>(std::move(shape), std::move(values));
}

inline TensorPtr make_zeros(std::vector<int> shape) {
  return std::make_shared<Tensor>(std::move(shape));
}

inline TensorPtr make_scalar(double v) { return make_tensor({1}, {v}); }

}  // namespace advtag
