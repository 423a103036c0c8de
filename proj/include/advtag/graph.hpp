#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "advtag/tensor.hpp"

namespace advtag {

/// Define-by-run tape. Ops append nodes in topological (insertion) order;
/// backward() walks the tape in strict reverse order, accumulating into
/// each input tensor's grad buffer with +=.
///
/// A Graph and its tensors belong to one thread for their lifetime.
class Graph {
 public:
  // ---- forward ops -------------------------------------------------------

  /// matmul: [m,n] x [n,k] -> [m,k], or [m,n] x [n] -> [m].
  TensorPtr matmul(const TensorPtr& a, const TensorPtr& b) {
    if (a->shape.size() != 2)
      throw ShapeError("matmul: left operand must be a matrix, got " + shape_str(a->shape));
    const int m = a->shape[0], n = a->shape[1];
    const bool vec = b->shape.size() == 1;
    const int k = vec ? 1 : b->shape[1];
    if ((vec && b->shape[0] != n) || (!vec && (b->shape.size() != 2 || b->shape[0] != n)))
      throw ShapeError("matmul: incompatible shapes " + shape_str(a->shape) + " x " +
                       shape_str(b->shape));
    TensorPtr out = vec ? make_zeros({m}) : make_zeros({m, k});
    const double* av = a->values.data();
    const double* bv = b->values.data();
    double* ov = out->values.data();
    for (int i = 0; i < m; ++i)
      for (int p = 0; p < n; ++p) {
        const double aip = av[i * n + p];
        for (int j = 0; j < k; ++j) ov[i * k + j] += aip * bv[p * k + j];
      }
    record(out, [a, b, out, m, n, k] {
      const double* og = out->grad.data();
      if (!a->frozen) {
        a->ensure_grad();
        double* ag = a->grad.data();
        const double* bv = b->values.data();
        for (int i = 0; i < m; ++i)
          for (int p = 0; p < n; ++p) {
            double s = 0;
            for (int j = 0; j < k; ++j) s += og[i * k + j] * bv[p * k + j];
            ag[i * n + p] += s;
          }
      }
      if (!b->frozen) {
        b->ensure_grad();
        double* bg = b->grad.data();
        const double* av = a->values.data();
        for (int p = 0; p < n; ++p)
          for (int j = 0; j < k; ++j) {
            double s = 0;
            for (int i = 0; i < m; ++i) s += av[i * n + p] * og[i * k + j];
            bg[p * k + j] += s;
          }
      }
    });
    return out;
  }

  TensorPtr add(const TensorPtr& a, const TensorPtr& b) {
    require_same_shape("add", a, b);
    TensorPtr out = make_zeros(a->shape);
    for (size_t i = 0; i < out->size(); ++i) out->values[i] = a->values[i] + b->values[i];
    record(out, [a, b, out] {
      accumulate(a, out->grad, [](double g) { return g; });
      accumulate(b, out->grad, [](double g) { return g; });
    });
    return out;
  }

  TensorPtr sub(const TensorPtr& a, const TensorPtr& b) {
    require_same_shape("sub", a, b);
    TensorPtr out = make_zeros(a->shape);
    for (size_t i = 0; i < out->size(); ++i) out->values[i] = a->values[i] - b->values[i];
    record(out, [a, b, out] {
      accumulate(a, out->grad, [](double g) { return g; });
      accumulate(b, out->grad, [](double g) { return -g; });
    });
    return out;
  }

  /// Elementwise product.
  TensorPtr mul(const TensorPtr& a, const TensorPtr& b) {
    require_same_shape("mul", a, b);
    TensorPtr out = make_zeros(a->shape);
    for (size_t i = 0; i < out->size(); ++i) out->values[i] = a->values[i] * b->values[i];
    record(out, [a, b, out] {
      if (!a->frozen) {
        a->ensure_grad();
        for (size_t i = 0; i < out->size(); ++i) a->grad[i] += out->grad[i] * b->values[i];
      }
      if (!b->frozen) {
        b->ensure_grad();
        for (size_t i = 0; i < out->size(); ++i) b->grad[i] += out->grad[i] * a->values[i];
      }
    });
    return out;
  }

  TensorPtr scale(const TensorPtr& a, double c) {
    TensorPtr out = make_zeros(a->shape);
    for (size_t i = 0; i < out->size(); ++i) out->values[i] = c * a->values[i];
    record(out, [a, out, c] { accumulate(a, out->grad, [c](double g) { return c * g; }); });
    return out;
  }

  TensorPtr tanh(const TensorPtr& a) {
    TensorPtr out = make_zeros(a->shape);
    for (size_t i = 0; i < out->size(); ++i) out->values[i] = std::tanh(a->values[i]);
    record(out, [a, out] {
      if (a->frozen) return;
      a->ensure_grad();
      for (size_t i = 0; i < out->size(); ++i)
        a->grad[i] += out->grad[i] * (1.0 - out->values[i] * out->values[i]);
    });
    return out;
  }

  TensorPtr sigmoid(const TensorPtr& a) {
    TensorPtr out = make_zeros(a->shape);
    for (size_t i = 0; i < out->size(); ++i) out->values[i] = sigmoid_val(a->values[i]);
    record(out, [a, out] {
      if (a->frozen) return;
      a->ensure_grad();
      for (size_t i = 0; i < out->size(); ++i)
        a->grad[i] += out->grad[i] * out->values[i] * (1.0 - out->values[i]);
    });
    return out;
  }

  TensorPtr relu(const TensorPtr& a) {
    TensorPtr out = make_zeros(a->shape);
    for (size_t i = 0; i < out->size(); ++i) out->values[i] = a->values[i] > 0 ? a->values[i] : 0.0;
    record(out, [a, out] {
      if (a->frozen) return;
      a->ensure_grad();
      for (size_t i = 0; i < out->size(); ++i)
        if (a->values[i] > 0) a->grad[i] += out->grad[i];
    });
    return out;
  }

  /// log(1 + exp(x)), computed without overflow.
  TensorPtr softplus(const TensorPtr& a) {
    TensorPtr out = make_zeros(a->shape);
    for (size_t i = 0; i < out->size(); ++i) out->values[i] = softplus_val(a->values[i]);
    record(out, [a, out] {
      if (a->frozen) return;
      a->ensure_grad();
      for (size_t i = 0; i < out->size(); ++i)
        a->grad[i] += out->grad[i] * sigmoid_val(a->values[i]);
    });
    return out;
  }

  /// Concatenates vectors (rank-1 tensors) into one vector.
  TensorPtr concat(const std::vector<TensorPtr>& parts) {
    if (parts.empty()) throw ShapeError("concat: no inputs");
    int total = 0;
    for (const auto& p : parts) {
      if (p->shape.size() != 1)
        throw ShapeError("concat: expects vectors, got " + shape_str(p->shape));
      total += p->shape[0];
    }
    TensorPtr out = make_zeros({total});
    size_t off = 0;
    for (const auto& p : parts) {
      std::copy(p->values.begin(), p->values.end(), out->values.begin() + off);
      off += p->size();
    }
    record(out, [parts, out] {
      size_t off = 0;
      for (const auto& p : parts) {
        if (!p->frozen) {
          p->ensure_grad();
          for (size_t i = 0; i < p->size(); ++i) p->grad[i] += out->grad[off + i];
        }
        off += p->size();
      }
    });
    return out;
  }

  /// Embedding gather: row `id` of a [V,d] table as a [d] vector.
  TensorPtr row_lookup(const TensorPtr& table, int id) {
    if (table->shape.size() != 2)
      throw ShapeError("row_lookup: table must be a matrix, got " + shape_str(table->shape));
    const int v = table->shape[0], d = table->shape[1];
    if (id < 0 || id >= v)
      throw ValueError("row_lookup: id " + std::to_string(id) + " out of range [0," +
                       std::to_string(v) + ")");
    TensorPtr out = make_zeros({d});
    std::copy(table->values.begin() + static_cast<size_t>(id) * d,
              table->values.begin() + static_cast<size_t>(id + 1) * d, out->values.begin());
    record(out, [table, out, id, d] {
      if (table->frozen) return;
      table->ensure_grad();
      for (int i = 0; i < d; ++i) table->grad[static_cast<size_t>(id) * d + i] += out->grad[i];
    });
    return out;
  }

  TensorPtr sum(const TensorPtr& a) {
    double s = 0;
    for (double v : a->values) s += v;
    TensorPtr out = make_scalar(s);
    record(out, [a, out] { accumulate(a, std::vector<double>(a->size(), out->grad[0]),
                                      [](double g) { return g; }); });
    return out;
  }

  TensorPtr mean(const TensorPtr& a) {
    double s = 0;
    for (double v : a->values) s += v;
    const double inv = 1.0 / static_cast<double>(a->size());
    TensorPtr out = make_scalar(s * inv);
    record(out, [a, out, inv] {
      if (a->frozen) return;
      a->ensure_grad();
      for (size_t i = 0; i < a->size(); ++i) a->grad[i] += out->grad[0] * inv;
    });
    return out;
  }

  /// Mean of a list of scalar tensors.
  TensorPtr average(const std::vector<TensorPtr>& scalars) {
    if (scalars.empty()) throw ShapeError("average: no inputs");
    return mean(concat(scalars));
  }

  /// Softmax cross-entropy of a logits vector against a gold class.
  /// Entries where mask[i]==false are excluded from the distribution
  /// (probability 0, no gradient). The gold class must be unmasked.
  TensorPtr softmax_cross_entropy(const TensorPtr& logits, int gold,
                                  const std::vector<char>& mask = {}) {
    if (logits->shape.size() != 1)
      throw ShapeError("softmax_cross_entropy: logits must be a vector, got " +
                       shape_str(logits->shape));
    const int k = logits->shape[0];
    if (gold < 0 || gold >= k)
      throw ValueError("softmax_cross_entropy: gold " + std::to_string(gold) +
                       " out of range for " + std::to_string(k) + " classes");
    if (!mask.empty() && static_cast<int>(mask.size()) != k)
      throw ShapeError("softmax_cross_entropy: mask length mismatch");
    if (!mask.empty() && !mask[gold])
      throw ValueError("softmax_cross_entropy: gold class is masked out");
    auto legal = [&](int i) { return mask.empty() || mask[i]; };
    double mx = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < k; ++i)
      if (legal(i)) mx = std::max(mx, logits->values[i]);
    double z = 0;
    for (int i = 0; i < k; ++i)
      if (legal(i)) z += std::exp(logits->values[i] - mx);
    const double logz = mx + std::log(z);
    TensorPtr out = make_scalar(logz - logits->values[gold]);
    record(out, [logits, out, gold, mask, k, mx, z] {
      if (logits->frozen) return;
      logits->ensure_grad();
      const double g = out->grad[0];
      for (int i = 0; i < k; ++i) {
        if (!mask.empty() && !mask[i]) continue;
        const double p = std::exp(logits->values[i] - mx) / z;
        logits->grad[i] += g * (p - (i == gold ? 1.0 : 0.0));
      }
    });
    return out;
  }

  /// Identity forward; backward multiplies the upstream gradient by -lambda.
  TensorPtr grad_reverse(const TensorPtr& x, double lambda) {
    if (lambda < 0) throw ValueError("grad_reverse: lambda must be >= 0");
    TensorPtr out = make_tensor(x->shape, x->values);
    record(out, [x, out, lambda] {
      accumulate(x, out->grad, [lambda](double g) { return -lambda * g; });
    });
    return out;
  }

  // ---- backward ----------------------------------------------------------

  void backward(const TensorPtr& loss) {
    if (!loss->is_scalar())
      throw ShapeError("backward: loss must be scalar, got " + shape_str(loss->shape));
    if (!std::isfinite(loss->values[0]))
      throw ValueError("backward: loss is not finite");
    loss->ensure_grad();
    loss->grad[0] = 1.0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
      it->out->ensure_grad();
      it->back();
    }
  }

  size_t node_count() const { return nodes_.size(); }

  static double sigmoid_val(double x) {
    return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  }
  static double softplus_val(double x) {
    return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
  }

 private:
  struct Node {
    TensorPtr out;
    std::function<void()> back;
  };
  std::vector<Node> nodes_;

  void record(TensorPtr out, std::function<void()> back) {
    nodes_.push_back({std::move(out), std::move(back)});
  }

  static void require_same_shape(const char* op, const TensorPtr& a, const TensorPtr& b) {
    if (a->shape != b->shape)
      throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a->shape) + " vs " +
                       shape_str(b->shape));
  }

  template <class F>
  static void accumulate(const TensorPtr& t, const std::vector<double>& upstream, F f) {
    if (t->frozen) return;
    t->ensure_grad();
    for (size_t i = 0; i < t->size(); ++i) t->grad[i] += f(upstream[i]);
  }
};

}  // namespace advtag
